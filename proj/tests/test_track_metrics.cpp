#include <catch2/catch_amalgamated.hpp>

#include "support/bruteforce.hpp"
#include "support/instances.hpp"
#include "vltrack/track_metrics.hpp"

using namespace vltrack;

namespace {

TrackSet empty_like(const TrackSet& gt) {
    TrackSet out;
    out.sequence_id = gt.sequence_id;
    out.frame_count = gt.frame_count;
    out.image_size = gt.image_size;
    return out;
}

// one object tracked over `frames` frames with constant box
TrackSet single_track(int id, int frames, const BBox& box) {
    TrackSet ts;
    ts.sequence_id = "seq";
    ts.frame_count = frames;
    ts.image_size = ImageSize{100, 100};
    for (int f = 0; f < frames; ++f) ts.insert(id, f, box);
    return ts;
}

}  // namespace

TEST_CASE("clear_scores on a perfect tracker") {
    const auto gt = single_track(1, 6, BBox{0.1, 0.1, 0.2, 0.3});
    const auto r = clear_scores(gt, gt);
    CHECK(r.mota == Catch::Approx(1.0));
    CHECK(r.fp == 0);
    CHECK(r.fn == 0);
    CHECK(r.idsw == 0);
}

TEST_CASE("clear_scores with an empty prediction is all misses") {
    const auto gt = single_track(1, 4, BBox{0.1, 0.1, 0.2, 0.3});
    const auto r = clear_scores(empty_like(gt), gt);
    CHECK(r.fn == 4);
    CHECK(r.fp == 0);
    CHECK(r.mota == Catch::Approx(0.0));
}

TEST_CASE("clear_scores counts one id switch") {
    // 1 GT track over 4 frames; prediction switches id at frame 3 (0-based 2)
    const BBox box{0.2, 0.2, 0.2, 0.2};
    const auto gt = single_track(1, 4, box);
    TrackSet pred = empty_like(gt);
    pred.insert(7, 0, box);
    pred.insert(7, 1, box);
    pred.insert(8, 2, box);
    pred.insert(8, 3, box);
    const auto r = clear_scores(pred, gt);
    CHECK(r.idsw == 1);
    CHECK(r.fp == 0);
    CHECK(r.fn == 0);
    CHECK(r.mota == Catch::Approx(1.0 - 1.0 / 4.0));
}

TEST_CASE("mota can go negative under false-positive floods") {
    const BBox box{0.2, 0.2, 0.2, 0.2};
    const auto gt = single_track(1, 4, box);
    TrackSet pred = empty_like(gt);
    pred.insert(1, 0, box);
    int id = 50;
    for (int f = 0; f < 4; ++f) {
        for (int k = 0; k < 3; ++k) {
            pred.insert(id++, f, BBox{0.7, 0.7, 0.05, 0.05});
        }
    }
    const auto r = clear_scores(pred, gt);
    CHECK(r.mota < 0.0);
}

TEST_CASE("idf1 anchors") {
    const BBox box{0.3, 0.3, 0.2, 0.2};
    const auto gt = single_track(1, 10, box);
    CHECK(idf1(gt, gt) == Catch::Approx(1.0));
    CHECK(idf1(empty_like(gt), gt) == Catch::Approx(0.0));

    // one switch halfway: best identity match covers 5 of 10 frames,
    // IDF1 = 2*5 / (2*5 + 5 + 5) = 0.5
    TrackSet pred = empty_like(gt);
    for (int f = 0; f < 5; ++f) pred.insert(11, f, box);
    for (int f = 5; f < 10; ++f) pred.insert(12, f, box);
    CHECK(idf1(pred, gt) == Catch::Approx(0.5));
    CHECK(idf1(pred, gt) == Catch::Approx(bruteforce::idf1(pred, gt)));
}

TEST_CASE("hota anchors") {
    const BBox box{0.3, 0.3, 0.2, 0.2};
    const auto gt = single_track(1, 6, box);
    const auto perfect = hota(gt, gt);
    CHECK(perfect.hota == Catch::Approx(1.0));
    CHECK(perfect.det_a == Catch::Approx(1.0));
    CHECK(perfect.ass_a == Catch::Approx(1.0));

    // two temporally disjoint GT tracks merged into one predicted id:
    // detection is perfect, association is not
    TrackSet gt2;
    gt2.sequence_id = "seq";
    gt2.frame_count = 6;
    gt2.image_size = ImageSize{100, 100};
    for (int f = 0; f < 3; ++f) gt2.insert(1, f, box);
    for (int f = 3; f < 6; ++f) gt2.insert(2, f, BBox{0.6, 0.6, 0.2, 0.2});
    TrackSet merged = empty_like(gt2);
    for (int f = 0; f < 3; ++f) merged.insert(9, f, box);
    for (int f = 3; f < 6; ++f) merged.insert(9, f, BBox{0.6, 0.6, 0.2, 0.2});
    const auto r = hota(merged, gt2);
    CHECK(r.det_a == Catch::Approx(1.0));
    CHECK(r.ass_a < 1.0);
    const auto bf = bruteforce::hota(merged, gt2);
    CHECK(r.hota == Catch::Approx(bf.hota).margin(1e-9));
    CHECK(r.ass_a == Catch::Approx(bf.ass_a).margin(1e-9));
}

TEST_CASE("metrics agree with enumeration oracles on random instances") {
    Rng rng(60601);
    for (int iter = 0; iter < 60; ++iter) {
        const auto inst = testsupport::random_instance(rng);
        INFO("iteration " << iter);

        const auto c = clear_scores(inst.pred, inst.gt);
        const auto bc = bruteforce::clear(inst.pred, inst.gt);
        REQUIRE(c.fp == bc.fp);
        REQUIRE(c.fn == bc.fn);
        REQUIRE(c.idsw == bc.idsw);
        REQUIRE(c.mota == Catch::Approx(bc.mota).margin(1e-9));

        REQUIRE(idf1(inst.pred, inst.gt) ==
                Catch::Approx(bruteforce::idf1(inst.pred, inst.gt)).margin(1e-9));

        const auto h = hota(inst.pred, inst.gt);
        const auto bh = bruteforce::hota(inst.pred, inst.gt);
        REQUIRE(h.hota == Catch::Approx(bh.hota).margin(1e-9));
        REQUIRE(h.det_a == Catch::Approx(bh.det_a).margin(1e-9));
        REQUIRE(h.ass_a == Catch::Approx(bh.ass_a).margin(1e-9));
    }
}

TEST_CASE("tracking metrics are invariant under predicted id relabeling") {
    Rng rng(112233);
    for (int iter = 0; iter < 20; ++iter) {
        const auto inst = testsupport::random_instance(rng);
        // relabel predicted ids through a random bijection
        auto ids = inst.pred.track_ids();
        auto shuffled = ids;
        rng.shuffle(shuffled);
        TrackSet relabeled = empty_like(inst.pred);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            relabeled.tracklets[shuffled[i] + 1000] = inst.pred.tracklets.at(ids[i]);
        }
        const auto a = tracking_scores(inst.pred, inst.gt);
        const auto b = tracking_scores(relabeled, inst.gt);
        REQUIRE(a.hota == Catch::Approx(b.hota).margin(1e-9));
        REQUIRE(a.idf1 == Catch::Approx(b.idf1).margin(1e-9));
        REQUIRE(a.mota == Catch::Approx(b.mota).margin(1e-9));
        REQUIRE(a.fp == b.fp);
        REQUIRE(a.fn == b.fn);
        REQUIRE(a.idsw == b.idsw);
    }
}

TEST_CASE("metrics reject mismatched sequences") {
    const auto gt = single_track(1, 4, BBox{0.1, 0.1, 0.2, 0.2});
    TrackSet other = gt;
    other.frame_count = 5;
    CHECK_THROWS_AS(clear_scores(other, gt), std::invalid_argument);
    other = gt;
    other.sequence_id = "different";
    CHECK_THROWS_AS(idf1(other, gt), std::invalid_argument);
}

TEST_CASE("cross-view scores: consistent ids are perfect") {
    const BBox box{0.2, 0.2, 0.2, 0.3};
    const auto view_a = single_track(3, 5, box);
    auto view_b = single_track(3, 5, BBox{0.5, 0.4, 0.2, 0.3});
    const std::vector<TrackSet> gts = {view_a, view_b};
    const auto map = identity_cross_view_map(gts);
    const auto r = crmot_scores({view_a, view_b}, gts, map);
    CHECK(r.cvr_idf1 == Catch::Approx(1.0));
    CHECK(r.cvrma == Catch::Approx(1.0));
}

TEST_CASE("cross-view scores degenerate to single-view idf1/mota") {
    Rng rng(9091);
    for (int iter = 0; iter < 15; ++iter) {
        const auto inst = testsupport::random_instance(rng, 3, 6);
        const std::vector<TrackSet> gts = {inst.gt};
        const std::vector<TrackSet> preds = {inst.pred};
        const auto r = crmot_scores(preds, gts, identity_cross_view_map(gts));
        REQUIRE(r.cvr_idf1 == Catch::Approx(idf1(inst.pred, inst.gt)).margin(1e-12));
        REQUIRE(r.cvrma == Catch::Approx(clear_scores(inst.pred, inst.gt).mota).margin(1e-12));
    }
}

TEST_CASE("cross-view scores punish inconsistent ids across views") {
    // two views, two identities, perfect per-view tracking; view B uses
    // swapped ids for the same physical people
    const BBox p1{0.1, 0.1, 0.15, 0.3};
    const BBox p2{0.6, 0.5, 0.15, 0.3};
    TrackSet gt_a, gt_b;
    gt_a.sequence_id = gt_b.sequence_id = "scene";
    gt_a.frame_count = gt_b.frame_count = 4;
    gt_a.image_size = gt_b.image_size = ImageSize{100, 100};
    for (int f = 0; f < 4; ++f) {
        gt_a.insert(1, f, p1);
        gt_a.insert(2, f, p2);
        gt_b.insert(1, f, p2);
        gt_b.insert(2, f, p1);
    }

    TrackSet good_a = gt_a, good_b = gt_b;
    const auto map = identity_cross_view_map({gt_a, gt_b});
    const auto consistent = crmot_scores({good_a, good_b}, {gt_a, gt_b}, map);
    CHECK(consistent.cvr_idf1 == Catch::Approx(1.0));

    TrackSet bad_b = gt_b;
    bad_b.tracklets.clear();
    bad_b.tracklets[2] = gt_b.tracklets.at(1);  // same boxes, crossed ids
    bad_b.tracklets[1] = gt_b.tracklets.at(2);
    // each view is still perfect in isolation; only the cross-view link breaks
    const double per_view_idf1 = (idf1(good_a, gt_a) + idf1(bad_b, gt_b)) / 2.0;
    CHECK(per_view_idf1 == Catch::Approx(1.0));
    const auto inconsistent = crmot_scores({good_a, bad_b}, {gt_a, gt_b}, map);
    CHECK(inconsistent.cvr_idf1 < consistent.cvr_idf1);
    CHECK(inconsistent.cvr_idf1 < per_view_idf1);
}

TEST_CASE("cross-view scores validate the id map") {
    const auto view = single_track(3, 5, BBox{0.2, 0.2, 0.2, 0.3});
    CrossViewIdMap missing(1);
    CHECK_THROWS_AS(crmot_scores({view}, {view}, missing), std::invalid_argument);

    TrackSet two = view;
    two.tracklets[4] = two.tracklets.at(3);
    CrossViewIdMap conflated(1);
    conflated[0][3] = 9;
    conflated[0][4] = 9;  // two locals -> one global within a view
    CHECK_THROWS_AS(crmot_scores({two}, {two}, conflated), std::invalid_argument);
}
