#pragma once

#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vltrack/grammar.hpp"
#include "vltrack/rng.hpp"
#include "vltrack/track_set.hpp"

namespace vltrack {

enum class TaskKind {
    Mot,
    Rmot,
    Crmot,
    VideoCaption,
    InstanceCaption,
    PretextDetection,
    PretextLocationPrediction,
    PretextReid,
};

inline const char* task_kind_to_string(TaskKind t) {
    switch (t) {
        case TaskKind::Mot: return "mot";
        case TaskKind::Rmot: return "rmot";
        case TaskKind::Crmot: return "crmot";
        case TaskKind::VideoCaption: return "video-caption";
        case TaskKind::InstanceCaption: return "instance-caption";
        case TaskKind::PretextDetection: return "pretext-detection";
        case TaskKind::PretextLocationPrediction: return "pretext-location";
        case TaskKind::PretextReid: return "pretext-reid";
    }
    return "mot";
}

inline std::optional<TaskKind> task_kind_from_string(std::string_view s) {
    if (s == "mot") return TaskKind::Mot;
    if (s == "rmot") return TaskKind::Rmot;
    if (s == "crmot") return TaskKind::Crmot;
    if (s == "video-caption") return TaskKind::VideoCaption;
    if (s == "instance-caption") return TaskKind::InstanceCaption;
    if (s == "pretext-detection") return TaskKind::PretextDetection;
    if (s == "pretext-location") return TaskKind::PretextLocationPrediction;
    if (s == "pretext-reid") return TaskKind::PretextReid;
    return std::nullopt;
}

inline bool is_caption_task(TaskKind t) {
    return t == TaskKind::VideoCaption || t == TaskKind::InstanceCaption;
}

// Window and output-length defaults for the dialogue protocol.
inline constexpr int kTrackingWindowLen = 16;
inline constexpr int kCaptionWindowLen = 32;
inline constexpr int kMaxOutputTokens = 2048;
// Recorded pixel budget per image; enforcement belongs to the model backend.
inline constexpr long kMaxImagePixels = 28L * 28L * 646L;

// The three multi-object tracking queries, fixed wording.
inline constexpr std::string_view kMotQueryFirstFrame =
    "Where are the objects located in the first frame?";
inline constexpr std::string_view kMotQueryTrack =
    "Track the location of these objects in this sequence.";
inline constexpr std::string_view kMotQueryNewObjects =
    "Are there any objects in the image sequence that were added midway through the sequence?";

inline constexpr std::string_view kNoNewObjectsAnswer = "No.";
inline constexpr std::string_view kNoMatchAnswer = "None.";
inline constexpr std::string_view kGoneAnswer = "GONE";

inline constexpr std::string_view kVideoCaptionQuery = "Describe what happens in this video.";
inline constexpr std::string_view kInstanceCaptionQueryPrefix = "Describe the person at ";

enum class Role { User, Assistant };

inline const char* role_to_string(Role r) { return r == Role::User ? "user" : "assistant"; }

struct Turn {
    Role role = Role::User;
    std::string text;
};

// A frame image plus an optional crop region (used by re-identification
// samples; cropping itself is the consumer's job).
struct ImageRef {
    std::string path;
    std::optional<BBox> crop;

    friend bool operator==(const ImageRef&, const ImageRef&) = default;
};

struct FrameWindow {
    int start = 0;
    int length = 0;
};

struct ConversationSample {
    TaskKind task = TaskKind::Mot;
    std::vector<ImageRef> image_refs;
    std::vector<Turn> turns;  // alternating, user first
    std::optional<std::string> supervision;
    FrameWindow window;
    std::uint64_t seed = 0;
};

// Maps 0-based frame indices to image paths using the usual 1-based
// zero-padded file naming.
struct ImageSource {
    std::string dir;
    std::string ext = ".jpg";
    int pad = 6;

    std::string ref(int frame) const {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%0*d", pad, frame + 1);
        return dir + "/" + buf + ext;
    }

    static ImageSource for_sequence(const std::string& sequence_id) {
        return ImageSource{sequence_id + "/img1", ".jpg", 6};
    }
};

namespace dialogue_detail {

inline void check_window(const TrackSet& gt, const FrameWindow& w) {
    if (w.length < 1) {
        throw std::invalid_argument("sample window must span at least one frame");
    }
    if (w.start < 0 || w.start + w.length > gt.frame_count) {
        throw std::invalid_argument("sample window [" + std::to_string(w.start) + "," +
                                    std::to_string(w.start + w.length) + ") exceeds sequence " +
                                    gt.sequence_id);
    }
}

inline std::vector<ImageRef> window_refs(const ImageSource& images, const FrameWindow& w) {
    std::vector<ImageRef> refs;
    refs.reserve(static_cast<std::size_t>(w.length));
    for (int f = w.start; f < w.start + w.length; ++f) refs.push_back(ImageRef{images.ref(f), {}});
    return refs;
}

// true when the track has no box in [frame, end)
inline bool gone_for_rest(const TrackSet& gt, int id, int frame, int end) {
    for (int f = frame; f < end; ++f) {
        if (gt.present(id, f)) return false;
    }
    return true;
}

// Renders the per-frame tracking blocks for the given (gt id -> sample id)
// mapping over window frames [from_offset, length). Objects enter with a
// NEW line when announce_new is set, otherwise with a plain ID line; a
// permanent disappearance is announced once with GONE.
inline std::string render_tracking_blocks(const TrackSet& gt,
                                          const std::vector<std::pair<int, int>>& id_order,
                                          const FrameWindow& w, int from_offset,
                                          bool announce_new) {
    const int window_end = w.start + w.length;
    std::map<int, bool> introduced;   // sample id -> seen yet
    std::map<int, bool> gone_announced;
    std::string out;
    for (int off = from_offset; off < w.length; ++off) {
        const int frame = w.start + off;
        std::string block;
        std::string new_lines;
        std::string gone_lines;
        for (const auto& [gt_id, sample_id] : id_order) {
            const BBox* box = gt.find(gt_id, frame);
            if (box) {
                if (!introduced[sample_id] && announce_new && off > 0) {
                    new_lines += new_lines.empty() ? "" : "\n";
                    new_lines += render_new_line(*box);
                } else {
                    block += block.empty() ? "" : "\n";
                    block += render_entry_line(sample_id, *box);
                }
                introduced[sample_id] = true;
            } else if (introduced[sample_id] && !gone_announced[sample_id] &&
                       gone_for_rest(gt, gt_id, frame, window_end)) {
                gone_lines += gone_lines.empty() ? "" : "\n";
                gone_lines += render_gone_line(sample_id);
                gone_announced[sample_id] = true;
            }
        }
        out += out.empty() ? "" : "\n";
        out += render_frame_heading(off + 1);
        if (!block.empty()) out += "\n" + block;
        if (!new_lines.empty()) out += "\n" + new_lines;
        if (!gone_lines.empty()) out += "\n" + gone_lines;
    }
    return out;
}

}  // namespace dialogue_detail

// Multi-object tracking sample: the three queries with their targets. The
// first answer lists first-frame boxes in a seeded random order; objects
// are renumbered 1..n in that order and the order carries over to the
// tracking target. The second query embeds the true first-frame boxes.
inline ConversationSample build_mot_sample(const TrackSet& gt, const FrameWindow& window,
                                           std::uint64_t rng_seed,
                                           const ImageSource& images = {}) {
    dialogue_detail::check_window(gt, window);
    auto first = gt.detections_at(window.start);
    if (first.empty()) {
        throw std::invalid_argument("build_mot_sample: no objects in the window's first frame of " +
                                    gt.sequence_id);
    }
    Rng rng(rng_seed);
    rng.shuffle(first);

    const ImageSource src = images.dir.empty() ? ImageSource::for_sequence(gt.sequence_id) : images;

    ConversationSample sample;
    sample.task = TaskKind::Mot;
    sample.window = window;
    sample.seed = rng_seed;
    sample.image_refs = dialogue_detail::window_refs(src, window);

    // renumber objects 1..n in shuffled order
    std::vector<std::pair<int, int>> id_order;  // (gt id, sample id)
    std::string first_frame_lines;
    for (std::size_t k = 0; k < first.size(); ++k) {
        id_order.emplace_back(first[k].first, static_cast<int>(k) + 1);
        first_frame_lines += k ? "\n" : "";
        first_frame_lines += render_entry_line(static_cast<int>(k) + 1, first[k].second);
    }

    const std::string tracking_target =
        dialogue_detail::render_tracking_blocks(gt, id_order, window, 1, false);

    // objects entering after the first frame, ordered by (entry frame, id)
    std::vector<std::pair<int, int>> entrants;  // (entry frame, gt id)
    for (const auto& [id, frames] : gt.tracklets) {
        if (frames.empty()) continue;
        const auto entry = frames.lower_bound(window.start);
        if (entry == frames.end() || entry->first >= window.start + window.length) continue;
        if (entry->first > window.start) entrants.emplace_back(entry->first, id);
    }
    std::sort(entrants.begin(), entrants.end());
    std::string entrants_answer;
    for (const auto& [frame, id] : entrants) {
        entrants_answer += entrants_answer.empty() ? "" : "\n";
        entrants_answer += render_new_line(*gt.find(id, frame));
    }
    if (entrants_answer.empty()) entrants_answer = std::string(kNoNewObjectsAnswer);

    sample.turns = {
        Turn{Role::User, std::string(kMotQueryFirstFrame)},
        Turn{Role::Assistant, first_frame_lines},
        Turn{Role::User, std::string(kMotQueryTrack) + "\n" + first_frame_lines},
        Turn{Role::Assistant, tracking_target},
        Turn{Role::User, std::string(kMotQueryNewObjects)},
        Turn{Role::Assistant, entrants_answer},
    };
    sample.supervision = tracking_target;
    return sample;
}

// Referring tracking: the expression replaces the first-frame positions.
// The target tracks exactly the matched GT tracks; objects entering the
// window later are announced with NEW lines.
inline ConversationSample build_rmot_sample(const TrackSet& gt, const SequenceMeta& meta,
                                            const std::string& expression_id,
                                            const FrameWindow& window,
                                            const ImageSource& images = {}) {
    dialogue_detail::check_window(gt, window);
    const Expression* expr = meta.find_expression(expression_id);
    if (!expr) {
        throw std::invalid_argument("build_rmot_sample: unknown expression '" + expression_id +
                                    "' in " + gt.sequence_id);
    }
    const ImageSource src = images.dir.empty() ? ImageSource::for_sequence(gt.sequence_id) : images;

    ConversationSample sample;
    sample.task = TaskKind::Rmot;
    sample.window = window;
    sample.image_refs = dialogue_detail::window_refs(src, window);

    // matched tracks visible anywhere in the window, numbered by entry order
    std::vector<std::pair<int, int>> entries;  // (entry frame, gt id)
    for (int id : expr->track_ids) {
        auto t = gt.tracklets.find(id);
        if (t == gt.tracklets.end()) continue;
        const auto entry = t->second.lower_bound(window.start);
        if (entry == t->second.end() || entry->first >= window.start + window.length) continue;
        entries.emplace_back(entry->first, id);
    }
    std::sort(entries.begin(), entries.end());
    std::vector<std::pair<int, int>> id_order;
    for (std::size_t k = 0; k < entries.size(); ++k) {
        id_order.emplace_back(entries[k].second, static_cast<int>(k) + 1);
    }

    const std::string target =
        entries.empty() ? std::string(kNoMatchAnswer)
                        : dialogue_detail::render_tracking_blocks(gt, id_order, window, 0, true);

    sample.turns = {
        Turn{Role::User,
             "Track the objects described as \"" + expr->text + "\" in this sequence."},
        Turn{Role::Assistant, target},
    };
    sample.supervision = target;
    return sample;
}

// Cross-view referring sample: the window budget is divided evenly across
// views (remainder to the earlier ones) and each block is introduced by a
// view marker. Ids are global: the same person keeps one id in every view.
inline ConversationSample build_crmot_sample(
    const std::vector<std::pair<const TrackSet*, const SequenceMeta*>>& views,
    const std::string& expression_id, int total_window_len,
    const std::vector<ImageSource>& sources = {}) {
    if (views.size() < 2) {
        throw std::invalid_argument("build_crmot_sample: need at least two views");
    }
    if (total_window_len < static_cast<int>(views.size())) {
        throw std::invalid_argument("build_crmot_sample: window too small for the view count");
    }
    const Expression* first_expr = views.front().second->find_expression(expression_id);
    if (!first_expr) {
        throw std::invalid_argument("build_crmot_sample: unknown expression '" + expression_id + "'");
    }
    for (const auto& [ts, meta] : views) {
        const Expression* e = meta->find_expression(expression_id);
        if (!e || e->text != first_expr->text) {
            throw std::invalid_argument(
                "build_crmot_sample: expression sets are inconsistent across views (sequence " +
                ts->sequence_id + ")");
        }
    }

    const int v_count = static_cast<int>(views.size());
    const int base = total_window_len / v_count;
    const int rem = total_window_len % v_count;

    // global matched identities, consistent numbering across views
    std::set<int> global_ids;
    for (const auto& [ts, meta] : views) {
        const Expression* e = meta->find_expression(expression_id);
        for (int id : e->track_ids) {
            if (ts->tracklets.count(id)) global_ids.insert(id);
        }
    }
    std::vector<std::pair<int, int>> id_order;
    {
        int next = 1;
        for (int id : global_ids) id_order.emplace_back(id, next++);
    }

    ConversationSample sample;
    sample.task = TaskKind::Crmot;
    sample.window = FrameWindow{0, total_window_len};

    std::string layout;
    std::string target;
    bool any_match = false;
    int ref_pos = 1;
    for (int v = 0; v < v_count; ++v) {
        const TrackSet& ts = *views[static_cast<std::size_t>(v)].first;
        const SequenceMeta& meta = *views[static_cast<std::size_t>(v)].second;
        const int len = base + (v < rem ? 1 : 0);
        const FrameWindow w{0, len};
        dialogue_detail::check_window(ts, w);
        const ImageSource src = sources.size() > static_cast<std::size_t>(v)
                                    ? sources[static_cast<std::size_t>(v)]
                                    : ImageSource::for_sequence(ts.sequence_id);
        const auto refs = dialogue_detail::window_refs(src, w);
        sample.image_refs.insert(sample.image_refs.end(), refs.begin(), refs.end());

        const std::string view_name = meta.view_id.value_or(ts.sequence_id);
        layout += "View " + view_name + ": images " + std::to_string(ref_pos) + "-" +
                  std::to_string(ref_pos + len - 1) + ".\n";
        ref_pos += len;

        // only identities actually present in this view's window
        std::vector<std::pair<int, int>> view_order;
        for (const auto& [gt_id, sample_id] : id_order) {
            bool present = false;
            for (int f = 0; f < len && !present; ++f) present = ts.present(gt_id, f);
            if (present) view_order.emplace_back(gt_id, sample_id);
        }
        if (!view_order.empty()) any_match = true;
        target += target.empty() ? "" : "\n";
        target += "View " + view_name + ":";
        if (!view_order.empty()) {
            target += "\n" + dialogue_detail::render_tracking_blocks(ts, view_order, w, 0, false);
        }
    }
    if (!any_match) target = std::string(kNoMatchAnswer);

    sample.turns = {
        Turn{Role::User, "Track the objects described as \"" + first_expr->text +
                             "\" across all camera views. Use the same ID for the same person in "
                             "every view.\n" +
                             layout},
        Turn{Role::Assistant, target},
    };
    sample.supervision = target;
    return sample;
}

// Caption sample; instance captions embed the subject's first-frame box so
// the model knows which person to describe.
inline ConversationSample build_caption_sample(const TrackSet& gt, const SequenceMeta& meta,
                                               TaskKind kind,
                                               std::optional<int> track_id = std::nullopt,
                                               const ImageSource& images = {}) {
    if (!is_caption_task(kind)) {
        throw std::invalid_argument("build_caption_sample: not a caption task");
    }
    if (!meta.captions) {
        throw std::invalid_argument("build_caption_sample: sequence " + gt.sequence_id +
                                    " has no caption ground truth");
    }
    const ImageSource src = images.dir.empty() ? ImageSource::for_sequence(gt.sequence_id) : images;

    ConversationSample sample;
    sample.task = kind;
    sample.window = FrameWindow{0, std::min(kCaptionWindowLen, gt.frame_count)};
    sample.image_refs = dialogue_detail::window_refs(src, sample.window);

    if (kind == TaskKind::VideoCaption) {
        sample.turns = {
            Turn{Role::User, std::string(kVideoCaptionQuery)},
            Turn{Role::Assistant, meta.captions->video_caption},
        };
        sample.supervision = meta.captions->video_caption;
        return sample;
    }

    if (!track_id) {
        throw std::invalid_argument("build_caption_sample: instance caption needs a track id");
    }
    auto cap = meta.captions->instance_captions.find(*track_id);
    if (cap == meta.captions->instance_captions.end()) {
        throw std::invalid_argument("build_caption_sample: no instance caption for track " +
                                    std::to_string(*track_id) + " in " + gt.sequence_id);
    }
    const BBox* box = gt.find(*track_id, sample.window.start);
    if (!box) {
        throw std::invalid_argument("build_caption_sample: track " + std::to_string(*track_id) +
                                    " is not visible in the first frame of " + gt.sequence_id);
    }
    sample.turns = {
        Turn{Role::User, std::string(kInstanceCaptionQueryPrefix) + render_bbox_tag(*box) +
                             " in the first frame of this sequence."},
        Turn{Role::Assistant, cap->second},
    };
    sample.supervision = cap->second;
    return sample;
}

struct PretextOptions {
    int segment_len = 8;        // frames shown for location prediction
    double p_disappear = 0.25;  // fraction of location samples ending in GONE
    int reid_candidates = 4;    // anchor-matching pool size, positive included
};

// Pretext samples for the mid-training recipes: single-frame detection,
// next-frame location prediction (with disappearance cases), and person
// re-identification with in- and cross-video negatives.
inline ConversationSample build_pretext_sample(const TrackSet& gt, TaskKind kind,
                                               std::uint64_t rng_seed,
                                               const ImageSource& images = {},
                                               const std::vector<const TrackSet*>& cross_video_pool = {},
                                               const PretextOptions& opt = {}) {
    Rng rng(rng_seed);
    const ImageSource src = images.dir.empty() ? ImageSource::for_sequence(gt.sequence_id) : images;

    ConversationSample sample;
    sample.task = kind;
    sample.seed = rng_seed;

    if (kind == TaskKind::PretextDetection) {
        std::vector<int> candidate_frames;
        for (int f = 0; f < gt.frame_count; ++f) {
            if (!gt.detections_at(f).empty()) candidate_frames.push_back(f);
        }
        if (candidate_frames.empty()) {
            throw std::invalid_argument("build_pretext_sample: no annotated frames in " +
                                        gt.sequence_id);
        }
        const int frame = candidate_frames[rng.below(candidate_frames.size())];
        sample.window = FrameWindow{frame, 1};
        sample.image_refs = {ImageRef{src.ref(frame), {}}};

        std::vector<Detection> dets;
        int next = 1;
        for (const auto& [id, box] : gt.detections_at(frame)) {
            Detection d;
            d.frame_index = frame;
            d.track_id = next++;
            d.bbox = box;
            dets.push_back(d);
            (void)id;
        }
        const std::string target = render_target_response(dets);
        sample.turns = {
            Turn{Role::User, "Locate every person in this image."},
            Turn{Role::Assistant, target},
        };
        sample.supervision = target;
        return sample;
    }

    if (kind == TaskKind::PretextLocationPrediction) {
        const int seg = std::max(2, opt.segment_len);
        if (gt.frame_count < seg + 1) {
            throw std::invalid_argument("build_pretext_sample: sequence " + gt.sequence_id +
                                        " too short for location prediction");
        }
        // candidate (track, start) pairs; "vanishing" ones have no box at
        // the prediction frame start+seg
        std::vector<std::pair<int, int>> steady, vanishing;
        for (const auto& [id, frames] : gt.tracklets) {
            for (int start = 0; start + seg < gt.frame_count; ++start) {
                if (!gt.present(id, start)) continue;
                if (gt.present(id, start + seg)) {
                    steady.emplace_back(id, start);
                } else {
                    vanishing.emplace_back(id, start);
                }
            }
        }
        const bool want_gone = rng.chance(opt.p_disappear);
        const auto& pool = want_gone ? (vanishing.empty() ? steady : vanishing)
                                     : (steady.empty() ? vanishing : steady);
        if (pool.empty()) {
            throw std::invalid_argument("build_pretext_sample: no usable trajectory segment in " +
                                        gt.sequence_id);
        }
        const auto [id, start] = pool[rng.below(pool.size())];
        sample.window = FrameWindow{start, seg};
        sample.image_refs = dialogue_detail::window_refs(src, sample.window);

        const BBox* prediction = gt.find(id, start + seg);
        const std::string target =
            prediction ? render_bbox_tag(*prediction) : std::string(kGoneAnswer);
        sample.turns = {
            Turn{Role::User,
                 "The object at " + render_bbox_tag(*gt.find(id, start)) +
                     " in the first frame is being tracked. Predict its location in the frame "
                     "that follows these images. If it is no longer visible, answer GONE."},
            Turn{Role::Assistant, target},
        };
        sample.supervision = target;
        return sample;
    }

    if (kind != TaskKind::PretextReid) {
        throw std::invalid_argument("build_pretext_sample: not a pretext task");
    }

    if (gt.frame_count < 2 || gt.tracklets.size() < 2) {
        throw std::invalid_argument("build_pretext_sample: re-identification needs >=2 frames and "
                                    ">=2 identities in " +
                                    gt.sequence_id);
    }
    std::vector<int> anchors;
    for (const auto& [id, frames] : gt.tracklets) {
        if (frames.size() >= 2) anchors.push_back(id);
    }
    if (anchors.empty()) {
        throw std::invalid_argument("build_pretext_sample: no identity spans two frames in " +
                                    gt.sequence_id);
    }
    const int anchor_id = anchors[rng.below(anchors.size())];
    const auto& anchor_frames = gt.tracklets.at(anchor_id);
    std::vector<int> frame_list;
    for (const auto& [f, _] : anchor_frames) frame_list.push_back(f);
    const int fa = frame_list[rng.below(frame_list.size())];
    int fb = fa;
    while (fb == fa) fb = frame_list[rng.below(frame_list.size())];

    struct Candidate {
        const TrackSet* seq;
        int frame;
        BBox box;
        bool positive;
    };
    std::vector<Candidate> candidates;
    candidates.push_back(Candidate{&gt, fb, *gt.find(anchor_id, fb), true});

    // same-video negatives: other identities at random frames
    std::vector<int> others;
    for (const auto& [id, _] : gt.tracklets) {
        if (id != anchor_id) others.push_back(id);
    }
    rng.shuffle(others);
    for (int id : others) {
        if (static_cast<int>(candidates.size()) >= opt.reid_candidates) break;
        const auto& frames = gt.tracklets.at(id);
        std::vector<int> fl;
        for (const auto& [f, _] : frames) fl.push_back(f);
        const int f = fl[rng.below(fl.size())];
        candidates.push_back(Candidate{&gt, f, *gt.find(id, f), false});
    }
    // cross-video negatives
    for (const TrackSet* other : cross_video_pool) {
        if (static_cast<int>(candidates.size()) >= opt.reid_candidates) break;
        if (!other || other->tracklets.empty() || other->sequence_id == gt.sequence_id) continue;
        const auto ids = other->track_ids();
        const int id = ids[rng.below(ids.size())];
        std::vector<int> fl;
        for (const auto& [f, _] : other->tracklets.at(id)) fl.push_back(f);
        const int f = fl[rng.below(fl.size())];
        candidates.push_back(Candidate{other, f, *other->find(id, f), false});
    }
    if (candidates.size() < 2) {
        throw std::invalid_argument("build_pretext_sample: not enough re-id candidates in " +
                                    gt.sequence_id);
    }
    rng.shuffle(candidates);

    sample.window = FrameWindow{fa, 1};
    sample.image_refs.push_back(ImageRef{src.ref(fa), *gt.find(anchor_id, fa)});
    int positive_index = -1;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto& c = candidates[i];
        const ImageSource cand_src = c.seq == &gt
                                         ? src
                                         : ImageSource::for_sequence(c.seq->sequence_id);
        sample.image_refs.push_back(ImageRef{cand_src.ref(c.frame), c.box});
        if (c.positive) positive_index = static_cast<int>(i) + 1;
    }

    const std::string target = std::to_string(positive_index);
    sample.turns = {
        Turn{Role::User, "The first image shows a person. Which of the following " +
                             std::to_string(candidates.size()) +
                             " candidates shows the same person? Answer with the candidate "
                             "number."},
        Turn{Role::Assistant, target},
    };
    sample.supervision = target;
    return sample;
}

}  // namespace vltrack
