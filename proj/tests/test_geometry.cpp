#include <catch2/catch_amalgamated.hpp>

#include "vltrack/geometry.hpp"
#include "vltrack/rng.hpp"

using namespace vltrack;

namespace {

BBox random_box(Rng& rng) {
    const double w = rng.uniform_in(0.02, 0.5);
    const double h = rng.uniform_in(0.02, 0.5);
    const double x = rng.uniform_in(0.0, 1.0 - w);
    const double y = rng.uniform_in(0.0, 1.0 - h);
    return BBox{x, y, w, h};
}

}  // namespace

TEST_CASE("iou identity, disjoint, and partial overlap") {
    const BBox b{0.2, 0.3, 0.1, 0.2};
    CHECK(iou(b, b) == Catch::Approx(1.0).margin(1e-15));

    const BBox a{0.0, 0.0, 0.1, 0.1};
    const BBox c{0.5, 0.5, 0.1, 0.1};
    CHECK(iou(a, c) == 0.0);

    // inter = 0.1*0.2 = 0.02, union = 0.04 + 0.04 - 0.02 = 0.06
    const BBox p{0.0, 0.0, 0.2, 0.2};
    const BBox q{0.1, 0.0, 0.2, 0.2};
    CHECK(iou(p, q) == Catch::Approx(1.0 / 3.0).margin(1e-12));
}

TEST_CASE("iou is symmetric and bounded by area ratio") {
    Rng rng(20240901);
    for (int i = 0; i < 500; ++i) {
        const BBox a = random_box(rng);
        const BBox b = random_box(rng);
        const double ab = iou(a, b);
        const double ba = iou(b, a);
        REQUIRE(std::abs(ab - ba) < 1e-12);
        REQUIRE(ab >= 0.0);
        REQUIRE(ab <= 1.0);
        const double bound = std::min(a.area(), b.area()) / std::max(a.area(), b.area());
        REQUIRE(ab <= bound + 1e-12);
    }
}

TEST_CASE("normalize_bbox exact division and full frame") {
    const ImageSize hd{1920, 1080};
    auto b = normalize_bbox(PixelBox{960, 540, 192, 216}, hd);
    REQUIRE(b);
    CHECK(b->x == Catch::Approx(0.5).margin(1e-12));
    CHECK(b->y == Catch::Approx(0.5).margin(1e-12));
    CHECK(b->w == Catch::Approx(0.1).margin(1e-12));
    CHECK(b->h == Catch::Approx(0.2).margin(1e-12));

    auto full = normalize_bbox(PixelBox{0, 0, 1920, 1080}, hd);
    REQUIRE(full);
    CHECK(full->x == 0.0);
    CHECK(full->y == 0.0);
    CHECK(full->w == 1.0);
    CHECK(full->h == 1.0);
}

TEST_CASE("normalize_bbox clamps overhanging boxes") {
    const ImageSize hd{1920, 1080};
    auto b = normalize_bbox(PixelBox{1900, 1070, 100, 100}, hd);
    REQUIRE(b);
    CHECK(b->x + b->w <= 1.0 + kEdgeTolerance);
    CHECK(b->y + b->h <= 1.0 + kEdgeTolerance);
    CHECK(b->x == Catch::Approx(1900.0 / 1920.0).margin(1e-12));

    // boxes poking out on the left get their origin clamped too
    auto left = normalize_bbox(PixelBox{-50, 10, 100, 100}, hd);
    REQUIRE(left);
    CHECK(left->x == 0.0);
    CHECK(left->w == Catch::Approx(50.0 / 1920.0).margin(1e-12));
}

TEST_CASE("normalize_bbox rejects degenerate and fully external boxes") {
    const ImageSize hd{1920, 1080};
    CHECK_FALSE(normalize_bbox(PixelBox{10, 10, 0, 50}, hd));
    CHECK_FALSE(normalize_bbox(PixelBox{10, 10, 50, -5}, hd));
    CHECK_FALSE(normalize_bbox(PixelBox{10, 10, 50, 50}, ImageSize{0, 1080}));
    CHECK_FALSE(normalize_bbox(PixelBox{2000, 10, 50, 50}, hd));   // fully right of frame
    CHECK_FALSE(normalize_bbox(PixelBox{-200, 10, 100, 50}, hd));  // fully left of frame
    CHECK_FALSE(make_bbox(1.2, 0.1, 0.1, 0.1));
}

TEST_CASE("pixel round trip within half a pixel when nothing clamps") {
    const ImageSize size{1280, 720};
    Rng rng(7);
    for (int i = 0; i < 300; ++i) {
        const double w = rng.uniform_in(1.0, 400.0);
        const double h = rng.uniform_in(1.0, 300.0);
        const double x = rng.uniform_in(0.0, 1280.0 - w);
        const double y = rng.uniform_in(0.0, 720.0 - h);
        auto nb = normalize_bbox(PixelBox{x, y, w, h}, size);
        REQUIRE(nb);
        const PixelBox back = denormalize_bbox(*nb, size);
        REQUIRE(std::abs(back.x - x) < 0.5);
        REQUIRE(std::abs(back.y - y) < 0.5);
        REQUIRE(std::abs(back.w - w) < 0.5);
        REQUIRE(std::abs(back.h - h) < 0.5);
    }
}
