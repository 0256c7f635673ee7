#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <set>

#include "vltrack/track_set.hpp"

namespace vltrack::testsupport {

inline bool boxes_close(const BBox& a, const BBox& b, double tol) {
    return std::abs(a.x - b.x) <= tol && std::abs(a.y - b.y) <= tol &&
           std::abs(a.w - b.w) <= tol && std::abs(a.h - b.h) <= tol;
}

// Finds an id bijection making the two track sets identical as
// (frame, id, box-within-tol) triples. Returns the mapping pred id -> gt id
// when one exists.
inline std::optional<std::map<int, int>> find_track_bijection(const TrackSet& pred,
                                                              const TrackSet& gt,
                                                              double tol = 1e-5) {
    if (pred.tracklets.size() != gt.tracklets.size()) return std::nullopt;
    std::map<int, int> mapping;
    std::set<int> used;
    for (const auto& [pid, pframes] : pred.tracklets) {
        bool matched = false;
        for (const auto& [gid, gframes] : gt.tracklets) {
            if (used.count(gid) || pframes.size() != gframes.size()) continue;
            bool same = true;
            auto git = gframes.begin();
            for (const auto& [f, box] : pframes) {
                if (git->first != f || !boxes_close(box, git->second, tol)) {
                    same = false;
                    break;
                }
                ++git;
            }
            if (same) {
                mapping[pid] = gid;
                used.insert(gid);
                matched = true;
                break;
            }
        }
        if (!matched) return std::nullopt;
    }
    return mapping;
}

}  // namespace vltrack::testsupport
