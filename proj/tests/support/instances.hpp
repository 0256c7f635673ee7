#pragma once

// Random small tracking instances for metric equivalence checks. All
// coordinates are continuous draws, so matching objectives are tie-free
// with probability one and enumeration oracles agree with solver-based
// implementations exactly.

#include "vltrack/rng.hpp"
#include "vltrack/track_set.hpp"

namespace vltrack::testsupport {

struct InstancePair {
    TrackSet gt;
    TrackSet pred;
};

inline BBox jittered(const BBox& b, Rng& rng, double sigma) {
    auto out = make_bbox(b.x + rng.normal(sigma), b.y + rng.normal(sigma),
                         b.w * (1.0 + rng.normal(sigma)), b.h * (1.0 + rng.normal(sigma)));
    if (out) return *out;
    return b;
}

// <= max_ids identities over <= max_frames frames; predictions are jittered
// copies of GT with dropped frames, occasional id splits, and spurious
// tracks, so IoUs straddle the full alpha grid.
inline InstancePair random_instance(Rng& rng, int max_ids = 3, int max_frames = 6) {
    InstancePair out;
    const int frames = rng.int_in(2, max_frames);
    const int n_gt = rng.int_in(1, max_ids);
    out.gt.sequence_id = out.pred.sequence_id = "instance";
    out.gt.frame_count = out.pred.frame_count = frames;
    out.gt.image_size = out.pred.image_size = ImageSize{1000, 1000};

    int next_pred_id = 101;
    for (int id = 1; id <= n_gt; ++id) {
        const int enter = rng.int_in(0, frames - 1);
        const int exit = rng.int_in(enter, frames - 1);
        const double w = rng.uniform_in(0.08, 0.3);
        const double h = rng.uniform_in(0.08, 0.3);
        double x = rng.uniform_in(0.0, 1.0 - w);
        double y = rng.uniform_in(0.0, 1.0 - h);

        const bool split = rng.chance(0.3);
        const int split_frame = split ? rng.int_in(enter, exit) : exit + 1;
        int pred_id = next_pred_id++;
        bool switched = false;
        const double sigma = rng.uniform_in(0.0, 0.08);

        for (int f = enter; f <= exit; ++f) {
            const BBox gt_box{x, y, w, h};
            out.gt.insert(id, f, gt_box);
            if (split && !switched && f >= split_frame) {
                pred_id = next_pred_id++;
                switched = true;
            }
            if (!rng.chance(0.2)) {  // dropped prediction with prob 0.2
                out.pred.insert(pred_id, f, jittered(gt_box, rng, sigma));
            }
            x = std::clamp(x + rng.uniform_in(-0.05, 0.05), 0.0, 1.0 - w);
            y = std::clamp(y + rng.uniform_in(-0.05, 0.05), 0.0, 1.0 - h);
        }
    }

    // spurious predicted track
    if (rng.chance(0.4)) {
        const int id = next_pred_id++;
        const int enter = rng.int_in(0, frames - 1);
        const int exit = rng.int_in(enter, frames - 1);
        const double w = rng.uniform_in(0.05, 0.25);
        const double h = rng.uniform_in(0.05, 0.25);
        for (int f = enter; f <= exit; ++f) {
            out.pred.insert(id, f,
                            BBox{rng.uniform_in(0.0, 1.0 - w), rng.uniform_in(0.0, 1.0 - h), w, h});
        }
    }
    return out;
}

}  // namespace vltrack::testsupport
