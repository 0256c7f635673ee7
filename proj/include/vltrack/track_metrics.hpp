#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "vltrack/assignment.hpp"
#include "vltrack/track_set.hpp"

namespace vltrack {

struct ClearResult {
    double mota = 0.0;
    int fp = 0;
    int fn = 0;
    int idsw = 0;
    int gt_total = 0;
};

namespace metric_detail {

inline void require_comparable(const TrackSet& pred, const TrackSet& gt) {
    if (pred.sequence_id != gt.sequence_id || pred.frame_count != gt.frame_count) {
        throw std::invalid_argument("metrics: prediction and ground truth describe different sequences (" +
                                    pred.sequence_id + " vs " + gt.sequence_id + ")");
    }
}

// Cardinality-first weight for gated matching: any eligible match outweighs
// every possible IoU sum, so the assignment maximizes match count and only
// then total IoU.
inline constexpr double kCardinalityBoost = 1000.0;

}  // namespace metric_detail

// CLEAR protocol: per-frame gated matching with carryover of the last known
// correspondence, Hungarian on the rest. MOTA = 1 - (FP+FN+IDSW)/GT.
inline ClearResult clear_scores(const TrackSet& pred, const TrackSet& gt,
                                double iou_threshold = 0.5) {
    metric_detail::require_comparable(pred, gt);
    ClearResult out;
    out.gt_total = static_cast<int>(gt.total_detections());

    std::map<int, int> last_match;  // gt id -> pred id, persists across gaps
    for (int f = 0; f < gt.frame_count; ++f) {
        const auto gdets = gt.detections_at(f);
        const auto pdets = pred.detections_at(f);
        const int ng = static_cast<int>(gdets.size());
        const int np = static_cast<int>(pdets.size());

        std::map<int, int> g_index, p_index;
        for (int i = 0; i < ng; ++i) g_index[gdets[i].first] = i;
        for (int j = 0; j < np; ++j) p_index[pdets[j].first] = j;

        std::vector<char> g_done(ng, 0), p_done(np, 0);
        std::vector<std::pair<int, int>> frame_matches;  // (gt idx, pred idx)

        // keep last known correspondences that still hold
        for (const auto& [gid, pid] : last_match) {
            auto gi = g_index.find(gid);
            auto pj = p_index.find(pid);
            if (gi == g_index.end() || pj == p_index.end()) continue;
            if (iou(gdets[gi->second].second, pdets[pj->second].second) >= iou_threshold) {
                g_done[gi->second] = 1;
                p_done[pj->second] = 1;
                frame_matches.emplace_back(gi->second, pj->second);
            }
        }

        // assignment over the remainder
        std::vector<int> g_rest, p_rest;
        for (int i = 0; i < ng; ++i) {
            if (!g_done[i]) g_rest.push_back(i);
        }
        for (int j = 0; j < np; ++j) {
            if (!p_done[j]) p_rest.push_back(j);
        }
        if (!g_rest.empty() && !p_rest.empty()) {
            std::vector<std::vector<double>> weight(g_rest.size(),
                                                    std::vector<double>(p_rest.size(), 0.0));
            for (std::size_t a = 0; a < g_rest.size(); ++a) {
                for (std::size_t b = 0; b < p_rest.size(); ++b) {
                    const double v = iou(gdets[g_rest[a]].second, pdets[p_rest[b]].second);
                    if (v >= iou_threshold) {
                        weight[a][b] = v + metric_detail::kCardinalityBoost;
                    }
                }
            }
            for (const auto& m : max_weight_matching(weight)) {
                frame_matches.emplace_back(g_rest[static_cast<std::size_t>(m.row)],
                                           p_rest[static_cast<std::size_t>(m.col)]);
            }
        }

        for (const auto& [gi, pj] : frame_matches) {
            const int gid = gdets[gi].first;
            const int pid = pdets[pj].first;
            auto prev = last_match.find(gid);
            if (prev != last_match.end() && prev->second != pid) ++out.idsw;
            last_match[gid] = pid;
        }
        out.fp += np - static_cast<int>(frame_matches.size());
        out.fn += ng - static_cast<int>(frame_matches.size());
    }

    if (out.gt_total == 0) {
        out.mota = (out.fp == 0 && out.idsw == 0) ? 1.0 : 0.0;
    } else {
        out.mota = 1.0 - static_cast<double>(out.fp + out.fn + out.idsw) /
                             static_cast<double>(out.gt_total);
    }
    return out;
}

// IDF1: one global identity assignment between GT and predicted tracks
// minimizing disagreeing detections, padded with unmatched-track slots.
inline double idf1(const TrackSet& pred, const TrackSet& gt, double iou_threshold = 0.5) {
    metric_detail::require_comparable(pred, gt);
    const auto gt_ids = gt.track_ids();
    const auto pred_ids = pred.track_ids();
    const int n = static_cast<int>(gt_ids.size());
    const int m = static_cast<int>(pred_ids.size());
    const double total_gt = static_cast<double>(gt.total_detections());
    const double total_pred = static_cast<double>(pred.total_detections());
    if (total_gt + total_pred == 0.0) return 1.0;
    if (n == 0 || m == 0) return 0.0;

    // per-pair overlap: frames where both are present and IoU clears the gate
    std::vector<std::vector<double>> overlap(n, std::vector<double>(m, 0.0));
    for (int f = 0; f < gt.frame_count; ++f) {
        const auto gdets = gt.detections_at(f);
        const auto pdets = pred.detections_at(f);
        for (const auto& [gid, gbox] : gdets) {
            const int i = static_cast<int>(std::lower_bound(gt_ids.begin(), gt_ids.end(), gid) -
                                           gt_ids.begin());
            for (const auto& [pid, pbox] : pdets) {
                if (iou(gbox, pbox) >= iou_threshold) {
                    const int j = static_cast<int>(
                        std::lower_bound(pred_ids.begin(), pred_ids.end(), pid) - pred_ids.begin());
                    overlap[i][j] += 1.0;
                }
            }
        }
    }

    std::vector<double> gt_count(n, 0.0), pred_count(m, 0.0);
    for (int i = 0; i < n; ++i) gt_count[i] = static_cast<double>(gt.tracklets.at(gt_ids[i]).size());
    for (int j = 0; j < m; ++j) {
        pred_count[j] = static_cast<double>(pred.tracklets.at(pred_ids[j]).size());
    }

    const int dim = n + m;
    const double kForbidden = total_gt + total_pred + 1.0;
    std::vector<std::vector<double>> cost(dim, std::vector<double>(dim, kForbidden));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            cost[i][j] = (gt_count[i] - overlap[i][j]) + (pred_count[j] - overlap[i][j]);
        }
        cost[i][m + i] = gt_count[i];  // gt track left unmatched
    }
    for (int j = 0; j < m; ++j) {
        cost[n + j][j] = pred_count[j];  // predicted track left unmatched
    }
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < n; ++i) cost[n + j][m + i] = 0.0;
    }

    const auto assign = hungarian_min_cost(cost);
    double min_cost = 0.0;
    for (int i = 0; i < dim; ++i) min_cost += cost[i][assign[i]];

    const double idtp = (total_gt + total_pred - min_cost) / 2.0;
    return 2.0 * idtp / (total_gt + total_pred);
}

struct HotaResult {
    double hota = 0.0;
    double det_a = 0.0;
    double ass_a = 0.0;
};

// HOTA over the 0.05..0.95 alpha grid. Per-frame matching maximizes the
// product of global track alignment and frame IoU; matches below alpha
// are discarded before counting.
inline HotaResult hota(const TrackSet& pred, const TrackSet& gt) {
    metric_detail::require_comparable(pred, gt);
    const auto gt_ids = gt.track_ids();
    const auto pred_ids = pred.track_ids();
    const int n = static_cast<int>(gt_ids.size());
    const int m = static_cast<int>(pred_ids.size());
    const double total_gt = static_cast<double>(gt.total_detections());
    const double total_pred = static_cast<double>(pred.total_detections());
    if (total_gt + total_pred == 0.0) return HotaResult{1.0, 1.0, 1.0};
    if (total_gt == 0.0 || total_pred == 0.0) return HotaResult{0.0, 0.0, 0.0};

    std::map<int, int> gidx, pidx;
    for (int i = 0; i < n; ++i) gidx[gt_ids[i]] = i;
    for (int j = 0; j < m; ++j) pidx[pred_ids[j]] = j;

    // per-frame similarity, cached as (gt idx, pred idx, iou) triples
    struct FrameSim {
        std::vector<int> g, p;                   // ids present, as indices
        std::vector<std::vector<double>> sim;    // |g| x |p|
    };
    std::vector<FrameSim> frames(static_cast<std::size_t>(gt.frame_count));
    std::vector<double> gt_frames(n, 0.0), pred_frames(m, 0.0);
    std::vector<std::vector<double>> potential(n, std::vector<double>(m, 0.0));

    for (int f = 0; f < gt.frame_count; ++f) {
        auto& fs = frames[static_cast<std::size_t>(f)];
        const auto gdets = gt.detections_at(f);
        const auto pdets = pred.detections_at(f);
        for (const auto& [gid, _] : gdets) fs.g.push_back(gidx[gid]);
        for (const auto& [pid, _] : pdets) fs.p.push_back(pidx[pid]);
        fs.sim.assign(gdets.size(), std::vector<double>(pdets.size(), 0.0));
        for (std::size_t a = 0; a < gdets.size(); ++a) {
            for (std::size_t b = 0; b < pdets.size(); ++b) {
                fs.sim[a][b] = iou(gdets[a].second, pdets[b].second);
            }
        }
        // two-way normalized similarity accumulates potential matches
        for (std::size_t a = 0; a < gdets.size(); ++a) {
            for (std::size_t b = 0; b < pdets.size(); ++b) {
                double row_sum = 0.0, col_sum = 0.0;
                for (std::size_t bb = 0; bb < pdets.size(); ++bb) row_sum += fs.sim[a][bb];
                for (std::size_t aa = 0; aa < gdets.size(); ++aa) col_sum += fs.sim[aa][b];
                const double denom = row_sum + col_sum - fs.sim[a][b];
                if (denom > 1e-12) {
                    potential[static_cast<std::size_t>(fs.g[a])][static_cast<std::size_t>(fs.p[b])] +=
                        fs.sim[a][b] / denom;
                }
            }
        }
        for (int gi : fs.g) gt_frames[static_cast<std::size_t>(gi)] += 1.0;
        for (int pj : fs.p) pred_frames[static_cast<std::size_t>(pj)] += 1.0;
    }

    std::vector<std::vector<double>> global_alignment(n, std::vector<double>(m, 0.0));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            const double denom = gt_frames[i] + pred_frames[j] - potential[i][j];
            global_alignment[i][j] = denom > 0.0 ? potential[i][j] / denom : 0.0;
        }
    }

    double sum_hota = 0.0, sum_det = 0.0, sum_ass = 0.0;
    int alpha_steps = 0;
    for (int step = 1; step <= 19; ++step) {
        const double alpha = 0.05 * step;
        double tp = 0.0;
        std::vector<std::vector<double>> match_count(n, std::vector<double>(m, 0.0));

        for (const auto& fs : frames) {
            if (fs.g.empty() || fs.p.empty()) continue;
            std::vector<std::vector<double>> score(fs.g.size(),
                                                   std::vector<double>(fs.p.size(), 0.0));
            for (std::size_t a = 0; a < fs.g.size(); ++a) {
                for (std::size_t b = 0; b < fs.p.size(); ++b) {
                    score[a][b] = global_alignment[static_cast<std::size_t>(fs.g[a])]
                                                  [static_cast<std::size_t>(fs.p[b])] *
                                  fs.sim[a][b];
                }
            }
            for (const auto& mt : max_weight_matching(score, -1.0)) {
                const auto a = static_cast<std::size_t>(mt.row);
                const auto b = static_cast<std::size_t>(mt.col);
                if (fs.sim[a][b] >= alpha - 1e-12) {
                    tp += 1.0;
                    match_count[static_cast<std::size_t>(fs.g[a])]
                               [static_cast<std::size_t>(fs.p[b])] += 1.0;
                }
            }
        }

        const double fn = total_gt - tp;
        const double fp = total_pred - tp;
        const double det_a = tp + fn + fp > 0.0 ? tp / (tp + fn + fp) : 1.0;
        double ass_a = 0.0;
        if (tp > 0.0) {
            double weighted = 0.0;
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < m; ++j) {
                    if (match_count[i][j] == 0.0) continue;
                    const double pair_ass =
                        match_count[i][j] / (gt_frames[i] + pred_frames[j] - match_count[i][j]);
                    weighted += match_count[i][j] * pair_ass;
                }
            }
            ass_a = weighted / tp;
        }
        sum_det += det_a;
        sum_ass += ass_a;
        sum_hota += std::sqrt(det_a * ass_a);
        ++alpha_steps;
    }

    HotaResult out;
    out.det_a = sum_det / alpha_steps;
    out.ass_a = sum_ass / alpha_steps;
    out.hota = sum_hota / alpha_steps;
    return out;
}

struct TrackingScores {
    double hota = 0.0;
    double det_a = 0.0;
    double ass_a = 0.0;
    double mota = 0.0;
    double idf1 = 0.0;
    int idsw = 0;
    int fp = 0;
    int fn = 0;
};

inline TrackingScores tracking_scores(const TrackSet& pred, const TrackSet& gt) {
    TrackingScores s;
    const auto h = hota(pred, gt);
    s.hota = h.hota;
    s.det_a = h.det_a;
    s.ass_a = h.ass_a;
    const auto c = clear_scores(pred, gt);
    s.mota = c.mota;
    s.idsw = c.idsw;
    s.fp = c.fp;
    s.fn = c.fn;
    s.idf1 = idf1(pred, gt);
    return s;
}

struct CrossViewScores {
    double cvr_idf1 = 0.0;
    double cvrma = 0.0;
};

// GT identity correspondence across views: per view, local track id ->
// global identity. Must be total on each view's GT ids and injective
// within a view.
using CrossViewIdMap = std::vector<std::map<int, int>>;

inline CrossViewIdMap identity_cross_view_map(const std::vector<TrackSet>& gts) {
    CrossViewIdMap map;
    for (const auto& gt : gts) {
        std::map<int, int> m;
        for (const auto& [id, _] : gt.tracklets) m[id] = id;
        map.push_back(std::move(m));
    }
    return map;
}

// Cross-view referring scores. Views are concatenated into one combined
// sequence, GT ids replaced by their global identity; predicted ids are
// taken as-is, so credit for a GT identity requires the same predicted id
// in every view where it appears. With a single view this reduces exactly
// to IDF1 / MOTA.
inline CrossViewScores crmot_scores(const std::vector<TrackSet>& preds,
                                    const std::vector<TrackSet>& gts,
                                    const CrossViewIdMap& id_map) {
    if (preds.size() != gts.size() || gts.empty()) {
        throw std::invalid_argument("crmot_scores: need matching non-empty view lists");
    }
    if (id_map.size() != gts.size()) {
        throw std::invalid_argument("crmot_scores: id map must cover every view");
    }
    for (std::size_t v = 0; v < gts.size(); ++v) {
        metric_detail::require_comparable(preds[v], gts[v]);
        std::map<int, int> seen_global;
        for (const auto& [local, _] : gts[v].tracklets) {
            auto it = id_map[v].find(local);
            if (it == id_map[v].end()) {
                throw std::invalid_argument("crmot_scores: view " + std::to_string(v) +
                                            " track " + std::to_string(local) +
                                            " missing from the cross-view id map");
            }
            auto [slot, fresh] = seen_global.emplace(it->second, local);
            if (!fresh) {
                throw std::invalid_argument("crmot_scores: view " + std::to_string(v) +
                                            " maps two tracks to global identity " +
                                            std::to_string(it->second));
            }
        }
    }

    TrackSet combined_gt, combined_pred;
    combined_gt.sequence_id = combined_pred.sequence_id = "cross_view";
    int offset = 0;
    for (const auto& gt : gts) {
        combined_gt.frame_count += gt.frame_count;
        combined_pred.frame_count += gt.frame_count;
    }
    combined_gt.image_size = gts.front().image_size;
    combined_pred.image_size = gts.front().image_size;
    for (std::size_t v = 0; v < gts.size(); ++v) {
        for (const auto& [local, frames] : gts[v].tracklets) {
            const int global = id_map[v].at(local);
            for (const auto& [f, box] : frames) combined_gt.insert(global, offset + f, box);
        }
        for (const auto& [pid, frames] : preds[v].tracklets) {
            for (const auto& [f, box] : frames) combined_pred.insert(pid, offset + f, box);
        }
        offset += gts[v].frame_count;
    }

    CrossViewScores out;
    out.cvr_idf1 = idf1(combined_pred, combined_gt);
    out.cvrma = clear_scores(combined_pred, combined_gt).mota;
    return out;
}

}  // namespace vltrack
