#pragma once

#include <algorithm>
#include <iterator>
#include <string>
#include <vector>

#include "vltrack/rng.hpp"
#include "vltrack/track_set.hpp"

namespace vltrack {

// Synthetic pedestrian-like sequences: linearly drifting boxes with noise,
// single presence interval per identity. Used by tests, the acceptance
// suite, and the `synth` CLI subcommand to exercise the pipeline without
// real video data.
struct SynthConfig {
    int num_objects = 5;
    int num_frames = 64;
    ImageSize image_size{1920, 1080};
    std::uint64_t seed = 1;
    double late_entry_fraction = 0.3;   // objects entering after frame 0
    double early_exit_fraction = 0.25;  // objects leaving before the end
    bool with_captions = false;
    bool with_expressions = false;
};

struct SynthSequence {
    TrackSet tracks;
    SequenceMeta meta;
};

namespace synth_detail {

inline const char* kColors[] = {"red", "blue", "green", "yellow", "black", "white"};
inline const char* kGarments[] = {"jacket", "shirt", "coat", "hoodie", "dress"};
inline const char* kActions[] = {"walking left", "walking right", "standing still",
                                 "crossing the scene", "moving away"};
inline const char* kPlaces[] = {"a plaza", "a parking lot", "a station hall", "a park path",
                                "a street corner"};
inline const char* kScenes[] = {"stroll past each other", "gather and then disperse",
                                "walk in different directions", "pace back and forth",
                                "wander without hurry"};

}  // namespace synth_detail

inline SynthSequence make_synth_sequence(const std::string& sequence_id, const SynthConfig& cfg) {
    if (cfg.num_objects < 1 || cfg.num_frames < 2) {
        throw std::invalid_argument("make_synth_sequence: need at least 1 object and 2 frames");
    }
    Rng rng(cfg.seed ^ fnv1a64(sequence_id));

    SynthSequence out;
    out.tracks.sequence_id = sequence_id;
    out.tracks.frame_count = cfg.num_frames;
    out.tracks.image_size = cfg.image_size;
    out.meta.sequence_id = sequence_id;

    for (int obj = 0; obj < cfg.num_objects; ++obj) {
        const int id = obj + 1;
        int enter = 0;
        int exit = cfg.num_frames - 1;
        if (obj > 0) {  // object 1 always spans the whole sequence
            if (rng.chance(cfg.late_entry_fraction)) {
                enter = rng.int_in(1, std::max(1, cfg.num_frames / 2));
            }
            if (rng.chance(cfg.early_exit_fraction)) {
                exit = rng.int_in(std::min(enter + 1, cfg.num_frames - 1), cfg.num_frames - 1);
            }
        }

        const double w = rng.uniform_in(0.04, 0.12);
        const double h = rng.uniform_in(0.10, 0.25);
        double x = rng.uniform_in(0.02, 0.98 - w);
        double y = rng.uniform_in(0.02, 0.98 - h);
        double vx = rng.uniform_in(-0.006, 0.006);
        double vy = rng.uniform_in(-0.004, 0.004);

        for (int f = enter; f <= exit; ++f) {
            out.tracks.insert(id, f, BBox{x, y, w, h});
            x += vx + rng.normal(0.0008);
            y += vy + rng.normal(0.0008);
            // bounce off the frame borders
            if (x < 0.01 || x + w > 0.99) {
                vx = -vx;
                x = std::clamp(x, 0.01, 0.99 - w);
            }
            if (y < 0.01 || y + h > 0.99) {
                vy = -vy;
                y = std::clamp(y, 0.01, 0.99 - h);
            }
        }
    }

    if (cfg.with_captions) {
        using namespace synth_detail;
        CaptionGt captions;
        captions.video_caption = "several people in " +
                                 std::string(kPlaces[rng.below(std::size(kPlaces))]) + " " +
                                 kScenes[rng.below(std::size(kScenes))];
        for (const auto& [id, _] : out.tracks.tracklets) {
            const char* color = kColors[rng.below(std::size(kColors))];
            const char* garment = kGarments[rng.below(std::size(kGarments))];
            const char* action = kActions[rng.below(std::size(kActions))];
            captions.instance_captions[id] = "a person in a " + std::string(color) + " " + garment +
                                             " " + action;
        }
        out.meta.captions = std::move(captions);
    }

    if (cfg.with_expressions) {
        const auto ids = out.tracks.track_ids();
        Expression everyone;
        everyone.id = "all";
        everyone.text = "all the people in the scene";
        everyone.track_ids.insert(ids.begin(), ids.end());
        out.meta.expressions.push_back(everyone);

        Expression first_half;
        first_half.id = "subset";
        first_half.text = "the people who were present from the start";
        for (int id : ids) {
            if (out.tracks.first_frame(id) == 0) first_half.track_ids.insert(id);
        }
        out.meta.expressions.push_back(first_half);
    }

    return out;
}

}  // namespace vltrack
