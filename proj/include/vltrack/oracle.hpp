#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vltrack/driver.hpp"
#include "vltrack/rng.hpp"

namespace vltrack {

struct PerturbationConfig {
    double jitter_sigma = 0.0;           // per-box Gaussian noise, normalized units
    double dropout_prob = 0.0;           // per-box deletion
    double swap_prob = 0.0;              // per adjacent id pair per frame
    double format_corruption_prob = 0.0; // per-box alternate-format rendering
    std::uint64_t rng_seed = 0;

    void validate() const {
        const auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
        if (!prob(dropout_prob) || !prob(swap_prob) || !prob(format_corruption_prob) ||
            jitter_sigma < 0.0) {
            throw std::invalid_argument("PerturbationConfig: probabilities must be in [0,1]");
        }
    }
};

// Answers every request by replaying ground truth for the requested frames,
// degraded by the configured perturbations (applied per frame in the order
// id swaps, jitter, dropout, format corruption). Deterministic under
// rng_seed. One instance serves one sequence or one multi-view scene; a
// request whose window starts at frame 0 begins a fresh run.
class OracleBackend : public Backend {
public:
    struct View {
        TrackSet gt;
        std::optional<SequenceMeta> meta;
    };

    OracleBackend(TrackSet gt, PerturbationConfig cfg,
                  std::optional<SequenceMeta> meta = std::nullopt)
        : OracleBackend(make_views(std::move(gt), std::move(meta)), std::move(cfg)) {}

    OracleBackend(std::vector<View> views, PerturbationConfig cfg)
        : views_(std::move(views)), cfg_(std::move(cfg)), rng_(seed_for(views_, cfg_)) {
        cfg_.validate();
        if (views_.empty()) {
            throw std::invalid_argument("OracleBackend: need at least one view");
        }
    }

    int corrupted_responses() const { return corrupted_responses_; }

    std::string complete(const BackendRequest& request) override;

private:
    static std::vector<View> make_views(TrackSet gt, std::optional<SequenceMeta> meta) {
        std::vector<View> v;
        v.push_back(View{std::move(gt), std::move(meta)});
        return v;
    }

    static std::uint64_t seed_for(const std::vector<View>& views, const PerturbationConfig& cfg) {
        std::uint64_t s = cfg.rng_seed ^ 0x9e3779b97f4a7c15ull;
        for (const auto& v : views) s ^= fnv1a64(v.gt.sequence_id);
        return s;
    }

    struct FrameEntry {
        int rid = 0;
        BBox box;
        bool is_new = false;
    };

    std::string render_frame_block(std::vector<FrameEntry> entries, std::vector<int> gone_rids,
                                   int heading_number);
    std::string render_box(const BBox& box);

    const View* view_for_ref(const std::string& ref) const;
    static std::optional<int> frame_from_ref(const std::string& ref);

    std::string answer_caption(const BackendRequest& request, const std::string& query) const;

    std::vector<View> views_;
    PerturbationConfig cfg_;
    Rng rng_;

    // persistent across rounds of one run
    std::map<int, int> assigned_;   // global gt id -> response id
    std::set<int> used_rids_;
    std::set<int> gone_emitted_;    // gt ids whose disappearance was announced
    int corrupted_responses_ = 0;
    bool corrupted_this_response_ = false;
};

inline const OracleBackend::View* OracleBackend::view_for_ref(const std::string& ref) const {
    if (views_.size() == 1) return &views_.front();
    for (const auto& v : views_) {
        const std::string needle = v.gt.sequence_id;
        std::size_t pos = 0;
        while ((pos = ref.find(needle, pos)) != std::string::npos) {
            const bool left_ok = pos == 0 || ref[pos - 1] == '/';
            const std::size_t end = pos + needle.size();
            const bool right_ok = end < ref.size() && ref[end] == '/';
            if (left_ok && right_ok) return &v;
            ++pos;
        }
    }
    return nullptr;
}

inline std::optional<int> OracleBackend::frame_from_ref(const std::string& ref) {
    // basename, extension stripped, trailing digits are the 1-based frame
    const std::size_t slash = ref.find_last_of('/');
    std::string stem = slash == std::string::npos ? ref : ref.substr(slash + 1);
    const std::size_t dot = stem.find_last_of('.');
    if (dot != std::string::npos) stem = stem.substr(0, dot);
    std::size_t begin = stem.size();
    while (begin > 0 && stem[begin - 1] >= '0' && stem[begin - 1] <= '9') --begin;
    if (begin == stem.size()) return std::nullopt;
    const std::string digits = stem.substr(begin);
    if (digits.size() > 9) return std::nullopt;
    return std::stoi(digits) - 1;
}

inline std::string OracleBackend::render_box(const BBox& box) {
    BBox b = box;
    if (cfg_.jitter_sigma > 0.0) {
        const auto jittered =
            make_bbox(b.x + rng_.normal(cfg_.jitter_sigma), b.y + rng_.normal(cfg_.jitter_sigma),
                      b.w + rng_.normal(cfg_.jitter_sigma), b.h + rng_.normal(cfg_.jitter_sigma));
        if (jittered) b = *jittered;
    }
    if (cfg_.format_corruption_prob > 0.0 && rng_.chance(cfg_.format_corruption_prob)) {
        corrupted_this_response_ = true;
        if (rng_.chance(0.5)) {
            // tag pair with a broken interior
            return "<bbox>" + render_number(b.x) + " " + render_number(b.y) + " " +
                   render_number(b.w) + " " + render_number(b.h) + "</bbox>";
        }
        return "(" + render_number(b.x) + "," + render_number(b.y) + "," + render_number(b.w) +
               "," + render_number(b.h) + ")";
    }
    return render_bbox_tag(b);
}

inline std::string OracleBackend::render_frame_block(std::vector<FrameEntry> entries,
                                                     std::vector<int> gone_rids,
                                                     int heading_number) {
    // id swaps: adjacent pairs in rid order; swaps persist through assigned_
    std::sort(entries.begin(), entries.end(),
              [](const FrameEntry& a, const FrameEntry& b) { return a.rid < b.rid; });
    if (cfg_.swap_prob > 0.0) {
        for (std::size_t i = 0; i + 1 < entries.size(); ++i) {
            if (entries[i].is_new || entries[i + 1].is_new) continue;
            if (!rng_.chance(cfg_.swap_prob)) continue;
            std::swap(entries[i].rid, entries[i + 1].rid);
            int gt_a = -1, gt_b = -1;
            for (const auto& [gt_id, rid] : assigned_) {
                if (rid == entries[i].rid) gt_a = gt_id;
                if (rid == entries[i + 1].rid) gt_b = gt_id;
            }
            if (gt_a >= 0 && gt_b >= 0) {
                std::swap(assigned_[gt_a], assigned_[gt_b]);
            }
            std::sort(entries.begin() + static_cast<std::ptrdiff_t>(i),
                      entries.begin() + static_cast<std::ptrdiff_t>(i) + 2,
                      [](const FrameEntry& a, const FrameEntry& b) { return a.rid < b.rid; });
        }
    }

    std::string block = render_frame_heading(heading_number);
    for (const auto& e : entries) {
        if (cfg_.dropout_prob > 0.0 && rng_.chance(cfg_.dropout_prob)) continue;
        block += '\n';
        if (e.is_new) {
            block += "NEW: " + render_box(e.box);
        } else {
            block += "ID " + std::to_string(e.rid) + ": " + render_box(e.box);
        }
    }
    for (int rid : gone_rids) {
        block += '\n' + render_gone_line(rid);
    }
    return block;
}

inline std::string OracleBackend::answer_caption(const BackendRequest& request,
                                                 const std::string& query) const {
    const View& v = views_.front();
    if (!v.meta || !v.meta->captions) {
        throw BackendError("oracle: no caption ground truth for " + v.gt.sequence_id,
                           /*retryable=*/false);
    }
    if (query.rfind(kVideoCaptionQuery, 0) == 0) {
        return v.meta->captions->video_caption;
    }
    // instance caption: find the track whose first-frame box matches best
    const auto parsed = parse_response(query);
    const BBox* wanted = parsed.first_bbox();
    if (!wanted || request.image_refs.empty()) {
        throw BackendError("oracle: malformed instance caption request", /*retryable=*/false);
    }
    const auto frame = frame_from_ref(request.image_refs.front().path);
    if (!frame) {
        throw BackendError("oracle: cannot read a frame index from image refs",
                           /*retryable=*/false);
    }
    int best_id = -1;
    double best_iou = 0.0;
    for (const auto& [id, box] : v.gt.detections_at(*frame)) {
        const double s = iou(box, *wanted);
        if (s > best_iou) {
            best_iou = s;
            best_id = id;
        }
    }
    auto cap = best_id >= 0 ? v.meta->captions->instance_captions.find(best_id)
                            : v.meta->captions->instance_captions.end();
    if (cap == v.meta->captions->instance_captions.end()) {
        throw BackendError("oracle: no instance caption matches the requested box",
                           /*retryable=*/false);
    }
    return cap->second;
}

inline std::string OracleBackend::complete(const BackendRequest& request) {
    if (request.turns.empty() || request.turns.back().role != Role::User) {
        throw BackendError("oracle: request must end with a user turn", /*retryable=*/false);
    }
    const std::string& query = request.turns.back().text;
    if (query.rfind(kVideoCaptionQuery, 0) == 0 || query.rfind(kInstanceCaptionQueryPrefix, 0) == 0) {
        return answer_caption(request, query);
    }

    // group the requested frames per view, preserving view order of appearance
    struct ViewWindow {
        const View* view = nullptr;
        std::vector<int> frames;
    };
    std::vector<ViewWindow> windows;
    for (const auto& ref : request.image_refs) {
        const View* v = view_for_ref(ref.path);
        if (!v) {
            throw BackendError("oracle: image ref '" + ref.path + "' matches no known view",
                               /*retryable=*/false);
        }
        const auto frame = frame_from_ref(ref.path);
        if (!frame || *frame < 0 || *frame >= v->gt.frame_count) {
            throw BackendError("oracle: image ref '" + ref.path + "' has no valid frame index",
                               /*retryable=*/false);
        }
        if (windows.empty() || windows.back().view != v) {
            windows.push_back(ViewWindow{v, {}});
        }
        windows.back().frames.push_back(*frame);
    }
    if (windows.empty()) {
        throw BackendError("oracle: request carries no images", /*retryable=*/false);
    }

    // a window starting at frame 0 starts a fresh run
    if (windows.front().frames.front() == 0) {
        assigned_.clear();
        used_rids_.clear();
        gone_emitted_.clear();
    }

    // parse prior blocks from the prompt: rid -> box per view
    std::map<const View*, std::map<int, BBox>> prior;
    {
        const auto view_blocks = split_view_blocks(query);
        auto collect = [&](const View* v, const std::string& text) {
            for (const auto& e : parse_response(text).entries) {
                if (e.object_id && e.bbox && e.format_class == FormatClass::WellFormed) {
                    prior[v][*e.object_id] = *e.bbox;
                }
            }
        };
        if (views_.size() == 1) {
            collect(&views_.front(), query);
        } else {
            for (const auto& [name, body] : view_blocks) {
                for (const auto& v : views_) {
                    if (v.gt.sequence_id == name) collect(&v, body);
                }
            }
        }
    }
    bool virgin = true;
    for (const auto& [_, entries] : prior) {
        if (!entries.empty()) virgin = false;
    }

    // reconcile with the driver: assignments whose rid vanished from the
    // prior are lost driver-side, and prior rids we have never assigned are
    // matched to ground truth at the frame before the window
    if (!virgin) {
        std::set<int> prior_rids;
        for (const auto& [_, entries] : prior) {
            for (const auto& [rid, box] : entries) prior_rids.insert(rid);
        }
        for (auto it = assigned_.begin(); it != assigned_.end();) {
            if (!prior_rids.count(it->second)) {
                it = assigned_.erase(it);
            } else {
                ++it;
            }
        }
        for (int rid : prior_rids) used_rids_.insert(rid);

        // iterate views in declaration order so matching stays deterministic
        for (const auto& v : views_) {
            auto pit = prior.find(&v);
            if (pit == prior.end()) continue;
            std::set<int> known_rids;
            for (const auto& [gt_id, rid] : assigned_) known_rids.insert(rid);
            const int match_frame = std::max(0, windows.front().frames.front() - 1);
            const auto gdets = v.gt.detections_at(match_frame);
            std::vector<int> rids;
            std::vector<BBox> boxes;
            for (const auto& [rid, box] : pit->second) {
                if (known_rids.count(rid)) continue;
                rids.push_back(rid);
                boxes.push_back(box);
            }
            if (rids.empty() || gdets.empty()) continue;
            std::vector<std::vector<double>> weight(rids.size(),
                                                    std::vector<double>(gdets.size(), 0.0));
            for (std::size_t a = 0; a < rids.size(); ++a) {
                for (std::size_t b = 0; b < gdets.size(); ++b) {
                    weight[a][b] = iou(boxes[a], gdets[b].second);
                }
            }
            for (const auto& m : max_weight_matching(weight, 1e-9)) {
                const int gt_id = gdets[static_cast<std::size_t>(m.col)].first;
                if (!assigned_.count(gt_id)) {
                    assigned_[gt_id] = rids[static_cast<std::size_t>(m.row)];
                }
            }
        }
    }

    auto next_rid = [&]() {
        int rid = used_rids_.empty() ? 1 : *used_rids_.rbegin() + 1;
        for (const auto& [gt_id, r] : assigned_) rid = std::max(rid, r + 1);
        return rid;
    };

    corrupted_this_response_ = false;
    std::string response;
    for (const auto& w : windows) {
        const TrackSet& gt = w.view->gt;
        if (views_.size() > 1) {
            if (!response.empty()) response += '\n';
            response += render_view_heading(gt.sequence_id);
        }
        for (std::size_t j = 0; j < w.frames.size(); ++j) {
            const int frame = w.frames[static_cast<std::size_t>(j)];
            std::vector<FrameEntry> entries;
            std::vector<int> gone;

            for (const auto& [gt_id, box] : gt.detections_at(frame)) {
                auto it = assigned_.find(gt_id);
                if (it != assigned_.end()) {
                    entries.push_back(FrameEntry{it->second, box, false});
                    continue;
                }
                if (gone_emitted_.count(gt_id)) continue;  // never resurrect an announced exit
                if (virgin && j == 0 && !used_rids_.count(gt_id)) {
                    // initialization: pass ground-truth ids through unless an
                    // earlier view's allocations already took the number
                    assigned_[gt_id] = gt_id;
                    used_rids_.insert(gt_id);
                    entries.push_back(FrameEntry{gt_id, box, false});
                } else {
                    const int rid = next_rid();
                    assigned_[gt_id] = rid;
                    used_rids_.insert(rid);
                    entries.push_back(FrameEntry{rid, box, true});
                }
            }

            // permanent disappearances: absent now and in every later frame
            // of every view
            for (auto it = assigned_.begin(); it != assigned_.end();) {
                const int gt_id = it->first;
                bool returns = false;
                for (const auto& v : views_) {
                    auto t = v.gt.tracklets.find(gt_id);
                    if (t == v.gt.tracklets.end()) continue;
                    if (t->second.lower_bound(frame) != t->second.end()) returns = true;
                }
                if (!returns) {
                    gone.push_back(it->second);
                    gone_emitted_.insert(gt_id);
                    it = assigned_.erase(it);
                } else {
                    ++it;
                }
            }
            std::sort(gone.begin(), gone.end());

            if (!response.empty()) response += '\n';
            response += render_frame_block(std::move(entries), std::move(gone),
                                           static_cast<int>(j) + 1);
        }
    }
    if (corrupted_this_response_) ++corrupted_responses_;
    return response;
}

inline std::unique_ptr<Backend> oracle_backend(TrackSet gt, const PerturbationConfig& cfg,
                                               std::optional<SequenceMeta> meta = std::nullopt) {
    return std::make_unique<OracleBackend>(std::move(gt), cfg, std::move(meta));
}

}  // namespace vltrack
