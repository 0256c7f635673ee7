#pragma once

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "vltrack/grammar.hpp"

namespace vltrack {

// Stage1 maps IoU into [0.5, 1] before multiplying with the format reward,
// so badly-localized but well-formatted answers still score; Stage4 drops
// the mapping and multiplies raw IoU.
enum class RewardStage { Stage1, Stage4 };

struct RewardConfig {
    RewardStage stage = RewardStage::Stage1;
    double well_formed_weight = 2.0;
    double alt_format_weight = 0.6;
    double untagged_weight = 0.4;
    double none_weight = 0.0;

    bool weights_monotone() const {
        return well_formed_weight >= alt_format_weight && alt_format_weight >= untagged_weight &&
               untagged_weight >= none_weight && none_weight >= 0.0;
    }
};

struct RewardOutcome {
    double format_reward = 0.0;
    double iou = 0.0;
    double total = 0.0;
    FormatClass format_class = FormatClass::NoBox;
};

inline double format_reward(FormatClass cls, const RewardConfig& cfg = {}) {
    switch (cls) {
        case FormatClass::WellFormed: return cfg.well_formed_weight;
        case FormatClass::AltFormat: return cfg.alt_format_weight;
        case FormatClass::UntaggedNumbers: return cfg.untagged_weight;
        case FormatClass::NoBox: return cfg.none_weight;
    }
    return cfg.none_weight;
}

// Scores a raw response against a ground-truth box. IoU is taken against
// the first parsed box in textual order; responses with no recoverable box
// score IoU 0.
inline RewardOutcome combined_reward(std::string_view text, const BBox& gt,
                                     const RewardConfig& cfg = {}) {
    ParsedResponse parsed = parse_response(text);
    RewardOutcome out;
    out.format_class = parsed.response_class();
    out.format_reward = format_reward(out.format_class, cfg);
    if (const BBox* b = parsed.first_bbox()) out.iou = iou(*b, gt);
    const double iou_term = cfg.stage == RewardStage::Stage1 ? out.iou / 2.0 + 0.5 : out.iou;
    out.total = out.format_reward * iou_term;
    return out;
}

// Group-relative advantages: mean-center and divide by the population
// stddev (guarded so uniform groups map to all-zero).
inline std::vector<double> group_advantages(const std::vector<double>& rewards) {
    if (rewards.size() < 2) {
        throw std::invalid_argument("group_advantages: need at least 2 rewards, got " +
                                    std::to_string(rewards.size()));
    }
    const double n = static_cast<double>(rewards.size());
    const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
    double var = 0.0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    var /= n;
    const double denom = std::sqrt(var) + 1e-8;
    std::vector<double> out;
    out.reserve(rewards.size());
    for (double r : rewards) out.push_back((r - mean) / denom);
    return out;
}

}  // namespace vltrack
