#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "vltrack/geometry.hpp"

namespace vltrack {

// All tracks of one sequence, ground truth or predicted. A tracklet owns at
// most one box per frame; track ids are unique within the set. std::map is
// used throughout so iteration order (and everything serialized from it)
// is deterministic.
struct TrackSet {
    std::string sequence_id;
    std::map<int, std::map<int, BBox>> tracklets;  // track_id -> frame -> box
    int frame_count = 0;
    ImageSize image_size;

    void insert(int track_id, int frame, const BBox& box) {
        if (frame < 0 || frame >= frame_count) {
            throw std::out_of_range("TrackSet::insert: frame " + std::to_string(frame) +
                                    " outside [0," + std::to_string(frame_count) + ") of " +
                                    sequence_id);
        }
        auto [it, fresh] = tracklets[track_id].emplace(frame, box);
        if (!fresh) {
            throw std::invalid_argument("TrackSet::insert: track " + std::to_string(track_id) +
                                        " already has a box at frame " + std::to_string(frame));
        }
    }

    const BBox* find(int track_id, int frame) const {
        auto t = tracklets.find(track_id);
        if (t == tracklets.end()) return nullptr;
        auto f = t->second.find(frame);
        return f == t->second.end() ? nullptr : &f->second;
    }

    bool present(int track_id, int frame) const { return find(track_id, frame) != nullptr; }

    // (id, box) pairs at one frame, ordered by id
    std::vector<std::pair<int, BBox>> detections_at(int frame) const {
        std::vector<std::pair<int, BBox>> out;
        for (const auto& [id, frames] : tracklets) {
            auto f = frames.find(frame);
            if (f != frames.end()) out.emplace_back(id, f->second);
        }
        return out;
    }

    std::vector<int> track_ids() const {
        std::vector<int> ids;
        ids.reserve(tracklets.size());
        for (const auto& [id, _] : tracklets) ids.push_back(id);
        return ids;
    }

    std::optional<int> first_frame(int track_id) const {
        auto t = tracklets.find(track_id);
        if (t == tracklets.end() || t->second.empty()) return std::nullopt;
        return t->second.begin()->first;
    }

    std::optional<int> last_frame(int track_id) const {
        auto t = tracklets.find(track_id);
        if (t == tracklets.end() || t->second.empty()) return std::nullopt;
        return t->second.rbegin()->first;
    }

    std::size_t total_detections() const {
        std::size_t n = 0;
        for (const auto& [_, frames] : tracklets) n += frames.size();
        return n;
    }

    bool empty() const { return tracklets.empty(); }
};

struct Expression {
    std::string id;
    std::string text;
    std::set<int> track_ids;  // GT tracks the expression refers to
};

struct CaptionGt {
    std::string video_caption;
    std::map<int, std::string> instance_captions;  // track_id -> caption
};

struct SequenceMeta {
    std::string sequence_id;
    std::optional<std::string> view_id;  // set for cross-view sequences
    std::vector<Expression> expressions;
    std::optional<CaptionGt> captions;

    const Expression* find_expression(const std::string& expression_id) const {
        for (const auto& e : expressions) {
            if (e.id == expression_id) return &e;
        }
        return nullptr;
    }
};

// Every track id referenced by an expression or instance caption must exist
// in the paired TrackSet.
inline void validate_meta(const SequenceMeta& meta, const TrackSet& ts) {
    for (const auto& expr : meta.expressions) {
        for (int id : expr.track_ids) {
            if (!ts.tracklets.count(id)) {
                throw std::invalid_argument("expression '" + expr.id + "' references unknown track " +
                                            std::to_string(id) + " in " + ts.sequence_id);
            }
        }
    }
    if (meta.captions) {
        for (const auto& [id, _] : meta.captions->instance_captions) {
            if (!ts.tracklets.count(id)) {
                throw std::invalid_argument("instance caption references unknown track " +
                                            std::to_string(id) + " in " + ts.sequence_id);
            }
        }
    }
}

// Restrict a TrackSet to the given tracks (used for referring tasks).
inline TrackSet filter_tracks(const TrackSet& ts, const std::set<int>& keep) {
    TrackSet out;
    out.sequence_id = ts.sequence_id;
    out.frame_count = ts.frame_count;
    out.image_size = ts.image_size;
    for (const auto& [id, frames] : ts.tracklets) {
        if (keep.count(id)) out.tracklets[id] = frames;
    }
    return out;
}

}  // namespace vltrack
