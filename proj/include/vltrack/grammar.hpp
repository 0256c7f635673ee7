#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vltrack/geometry.hpp"

namespace vltrack {

// Format tiers a model response can fall into, best to worst:
//   WellFormed      -- at least one <bbox>x,y,w,h</bbox> with a valid interior
//   AltFormat       -- bbox tags present but malformed inside, or a bare
//                      tuple next to a tag fragment
//   UntaggedNumbers -- a 4-number tuple with no tags anywhere
//   NoBox           -- nothing that looks like a box
enum class FormatClass { WellFormed, AltFormat, UntaggedNumbers, NoBox };

inline const char* to_string(FormatClass c) {
    switch (c) {
        case FormatClass::WellFormed: return "well_formed";
        case FormatClass::AltFormat: return "alt_format";
        case FormatClass::UntaggedNumbers: return "untagged_numbers";
        case FormatClass::NoBox: return "no_box";
    }
    return "no_box";
}

inline std::optional<FormatClass> format_class_from_string(std::string_view s) {
    if (s == "well_formed") return FormatClass::WellFormed;
    if (s == "alt_format") return FormatClass::AltFormat;
    if (s == "untagged_numbers") return FormatClass::UntaggedNumbers;
    if (s == "no_box") return FormatClass::NoBox;
    return std::nullopt;
}

struct ParsedEntry {
    std::optional<int> object_id;
    std::optional<BBox> bbox;
    FormatClass format_class = FormatClass::NoBox;
    std::size_t span_begin = 0;  // byte range of the box region in the source text
    std::size_t span_end = 0;
};

struct ParsedResponse {
    std::vector<ParsedEntry> entries;  // textual order
    std::string residual_text;
    std::vector<BBox> declared_new_objects;
    std::vector<int> declared_disappeared;

    // Best class present; per Eq-style scoring the response is judged as a
    // whole, per-entry classes stay around for diagnostics.
    FormatClass response_class() const {
        FormatClass best = FormatClass::NoBox;
        for (const auto& e : entries) {
            if (static_cast<int>(e.format_class) < static_cast<int>(best)) best = e.format_class;
        }
        if (!declared_new_objects.empty() && best != FormatClass::WellFormed) {
            best = FormatClass::WellFormed;
        }
        return best;
    }

    const BBox* first_bbox() const {
        for (const auto& e : entries) {
            if (e.bbox) return &*e.bbox;
        }
        if (!declared_new_objects.empty()) return &declared_new_objects.front();
        return nullptr;
    }

    bool has_well_formed_entry() const {
        for (const auto& e : entries) {
            if (e.format_class == FormatClass::WellFormed) return true;
        }
        return !declared_new_objects.empty();
    }
};

namespace grammar_detail {

inline bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && is_ws(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_ws(s.back())) s.remove_suffix(1);
    return s;
}

// Strict token for canonical interiors: unsigned decimal, at most six
// fraction digits, no exponent, no sign.
inline std::optional<double> parse_strict_number(std::string_view tok) {
    tok = trim(tok);
    if (tok.empty()) return std::nullopt;
    std::size_t i = 0;
    std::size_t int_digits = 0;
    while (i < tok.size() && is_digit(tok[i])) {
        ++i;
        ++int_digits;
    }
    std::size_t frac_digits = 0;
    if (i < tok.size() && tok[i] == '.') {
        ++i;
        while (i < tok.size() && is_digit(tok[i])) {
            ++i;
            ++frac_digits;
        }
    }
    if (i != tok.size()) return std::nullopt;
    if (int_digits == 0 && frac_digits == 0) return std::nullopt;
    if (frac_digits > 6) return std::nullopt;
    return std::stod(std::string(tok));
}

inline bool in_unit_range(double v) { return v >= 0.0 && v <= 1.0 + kEdgeTolerance; }

// Exactly four comma-separated strict numbers, each in [0, 1+eps].
inline std::optional<std::array<double, 4>> parse_canonical_interior(std::string_view interior) {
    std::array<double, 4> vals{};
    std::size_t field = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= interior.size(); ++i) {
        if (i == interior.size() || interior[i] == ',') {
            if (field >= 4) return std::nullopt;
            auto v = parse_strict_number(interior.substr(start, i - start));
            if (!v || !in_unit_range(*v)) return std::nullopt;
            vals[field++] = *v;
            start = i + 1;
        }
    }
    if (field != 4) return std::nullopt;
    return vals;
}

// Salvage pass for malformed interiors/tuples: pull out numeric tokens
// regardless of separators; succeeds when exactly four in-range numbers
// are found.
inline std::optional<std::array<double, 4>> recover_four_numbers(std::string_view text) {
    std::array<double, 4> vals{};
    std::size_t count = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        if (is_digit(text[i]) || (text[i] == '.' && i + 1 < text.size() && is_digit(text[i + 1]))) {
            std::size_t j = i;
            bool seen_dot = false;
            while (j < text.size() && (is_digit(text[j]) || (text[j] == '.' && !seen_dot))) {
                if (text[j] == '.') seen_dot = true;
                ++j;
            }
            double v = 0.0;
            try {
                v = std::stod(std::string(text.substr(i, j - i)));
            } catch (...) {
                return std::nullopt;
            }
            if (!in_unit_range(v)) return std::nullopt;
            if (count >= 4) return std::nullopt;
            vals[count++] = v;
            i = j;
        } else {
            ++i;
        }
    }
    if (count != 4) return std::nullopt;
    return vals;
}

inline std::optional<BBox> box_from_values(const std::array<double, 4>& v) {
    return make_bbox(v[0], v[1], v[2], v[3]);
}

struct BoxRegion {
    std::size_t begin = 0;
    std::size_t end = 0;
    FormatClass cls = FormatClass::NoBox;
    std::optional<BBox> bbox;
};

inline constexpr std::string_view kOpenTag = "<bbox>";
inline constexpr std::string_view kCloseTag = "</bbox>";

// Scans the whole text for box-like regions: complete tag pairs first, then
// 4-number tuples outside them. Sets fragment_present when a dangling tag
// piece exists outside any complete pair; per the classification rules that
// upgrades untagged tuples to AltFormat.
inline std::vector<BoxRegion> scan_box_regions(std::string_view text, bool& fragment_present) {
    std::vector<BoxRegion> regions;
    std::vector<std::pair<std::size_t, std::size_t>> covered;

    std::size_t pos = 0;
    while (true) {
        std::size_t open = text.find(kOpenTag, pos);
        if (open == std::string_view::npos) break;
        std::size_t close = text.find(kCloseTag, open + kOpenTag.size());
        if (close == std::string_view::npos) break;
        std::string_view interior = text.substr(open + kOpenTag.size(), close - open - kOpenTag.size());
        BoxRegion r;
        r.begin = open;
        r.end = close + kCloseTag.size();
        if (auto vals = parse_canonical_interior(interior)) {
            r.cls = FormatClass::WellFormed;
            r.bbox = box_from_values(*vals);
            if (!r.bbox) r.cls = FormatClass::AltFormat;  // degenerate box inside valid syntax
        } else {
            r.cls = FormatClass::AltFormat;
            if (auto vals2 = recover_four_numbers(interior)) r.bbox = box_from_values(*vals2);
        }
        covered.emplace_back(r.begin, r.end);
        regions.push_back(r);
        pos = r.end;
    }

    auto inside_pair = [&](std::size_t p) {
        for (auto [b, e] : covered) {
            if (p >= b && p < e) return true;
        }
        return false;
    };

    fragment_present = false;
    for (std::string_view frag : {std::string_view("<bbox"), std::string_view("</bbox")}) {
        std::size_t p = 0;
        while ((p = text.find(frag, p)) != std::string_view::npos) {
            if (!inside_pair(p)) {
                fragment_present = true;
                break;
            }
            ++p;
        }
        if (fragment_present) break;
    }

    // tuple scan outside tag pairs: a maximal comma-chain of numbers,
    // optionally wrapped in () or [], counts when its length is exactly 4
    std::size_t i = 0;
    while (i < text.size()) {
        if (inside_pair(i)) {
            ++i;
            continue;
        }
        if (!is_digit(text[i]) && !(text[i] == '.' && i + 1 < text.size() && is_digit(text[i + 1]))) {
            ++i;
            continue;
        }
        // walk a chain: number (, number)*
        std::size_t chain_begin = i;
        std::size_t numbers = 0;
        std::size_t j = i;
        std::size_t chain_end = i;
        while (j < text.size() && !inside_pair(j)) {
            std::size_t k = j;
            bool seen_dot = false;
            while (k < text.size() && (is_digit(text[k]) || (text[k] == '.' && !seen_dot))) {
                if (text[k] == '.') seen_dot = true;
                ++k;
            }
            if (k == j) break;
            ++numbers;
            chain_end = k;
            // separator: optional spaces, one comma, optional spaces
            std::size_t s = k;
            while (s < text.size() && (text[s] == ' ' || text[s] == '\t')) ++s;
            if (s < text.size() && text[s] == ',') {
                ++s;
                while (s < text.size() && (text[s] == ' ' || text[s] == '\t')) ++s;
                if (s < text.size() && (is_digit(text[s]) || text[s] == '.')) {
                    j = s;
                    continue;
                }
            }
            break;
        }
        if (numbers == 4) {
            BoxRegion r;
            r.begin = chain_begin;
            r.end = chain_end;
            // include wrapping brackets in the span when present
            if (chain_begin > 0 && (text[chain_begin - 1] == '(' || text[chain_begin - 1] == '[')) {
                r.begin = chain_begin - 1;
                if (chain_end < text.size() && (text[chain_end] == ')' || text[chain_end] == ']')) {
                    r.end = chain_end + 1;
                }
            }
            r.cls = FormatClass::UntaggedNumbers;
            if (auto vals = recover_four_numbers(text.substr(chain_begin, chain_end - chain_begin))) {
                r.bbox = box_from_values(*vals);
            }
            regions.push_back(r);
        }
        i = chain_end > i ? chain_end : i + 1;
    }

    if (fragment_present) {
        for (auto& r : regions) {
            if (r.cls == FormatClass::UntaggedNumbers) r.cls = FormatClass::AltFormat;
        }
    }

    std::sort(regions.begin(), regions.end(),
              [](const BoxRegion& a, const BoxRegion& b) { return a.begin < b.begin; });
    return regions;
}

}  // namespace grammar_detail

// Response-level format classification over arbitrary text. Total: never
// throws, any input lands in one of the four classes.
inline FormatClass classify_format(std::string_view text) {
    bool fragment = false;
    auto regions = grammar_detail::scan_box_regions(text, fragment);
    FormatClass best = FormatClass::NoBox;
    for (const auto& r : regions) {
        if (static_cast<int>(r.cls) < static_cast<int>(best)) best = r.cls;
    }
    return best;
}

// --- canonical rendering ------------------------------------------------

inline std::string render_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

inline std::string render_bbox_tag(const BBox& b) {
    std::string out = "<bbox>";
    out += render_number(b.x);
    out += ',';
    out += render_number(b.y);
    out += ',';
    out += render_number(b.w);
    out += ',';
    out += render_number(b.h);
    out += "</bbox>";
    return out;
}

inline std::string render_entry_line(int id, const BBox& b) {
    return "ID " + std::to_string(id) + ": " + render_bbox_tag(b);
}

inline std::string render_new_line(const BBox& b) { return "NEW: " + render_bbox_tag(b); }

inline std::string render_gone_line(int id) { return "GONE: " + std::to_string(id); }

// One `ID k: <bbox>...</bbox>` line per detection, ordered by id. All
// detections must share a frame and carry ids.
inline std::string render_target_response(std::vector<Detection> detections) {
    if (detections.empty()) return "";
    for (const auto& d : detections) {
        if (!d.track_id) {
            throw std::invalid_argument("render_target_response: detection without track id");
        }
        if (d.frame_index != detections.front().frame_index) {
            throw std::invalid_argument("render_target_response: detections span multiple frames");
        }
    }
    std::sort(detections.begin(), detections.end(),
              [](const Detection& a, const Detection& b) { return *a.track_id < *b.track_id; });
    std::string out;
    for (std::size_t i = 0; i < detections.size(); ++i) {
        if (i) out += '\n';
        out += render_entry_line(*detections[i].track_id, detections[i].bbox);
    }
    return out;
}

// --- response parsing ----------------------------------------------------

// Parses one response region against the canonical line grammar:
//   ID <k>: <bbox>x,y,w,h</bbox>
//   NEW: <bbox>x,y,w,h</bbox>
//   GONE: <k>
// Box-like content that misses the grammar still becomes an entry with the
// appropriate format class; everything else accumulates in residual_text.
inline ParsedResponse parse_response(std::string_view text) {
    using namespace grammar_detail;
    ParsedResponse out;

    bool fragment = false;  // upgrades are applied inside the scan
    auto regions = scan_box_regions(text, fragment);
    (void)fragment;

    std::size_t line_start = 0;
    std::size_t region_idx = 0;
    bool first_residual = true;
    while (line_start <= text.size()) {
        std::size_t line_end = text.find('\n', line_start);
        if (line_end == std::string_view::npos) line_end = text.size();
        std::string_view line = text.substr(line_start, line_end - line_start);
        std::string_view body = trim(line);

        // regions whose start falls on this line
        std::vector<const BoxRegion*> line_regions;
        while (region_idx < regions.size() && regions[region_idx].begin < line_end) {
            if (regions[region_idx].begin >= line_start) line_regions.push_back(&regions[region_idx]);
            ++region_idx;
        }

        bool consumed = false;
        if (!body.empty()) {
            if (body.substr(0, 3) == "ID " && !line_regions.empty()) {
                std::string_view rest = trim(body.substr(3));
                std::size_t d = 0;
                while (d < rest.size() && is_digit(rest[d])) ++d;
                std::string_view after = trim(rest.substr(d));
                if (d > 0 && d <= 9 && !after.empty() && after.front() == ':') {
                    int id = std::stoi(std::string(rest.substr(0, d)));
                    bool first = true;
                    for (const BoxRegion* r : line_regions) {
                        ParsedEntry e;
                        e.object_id = first ? std::optional<int>(id) : std::nullopt;
                        e.bbox = r->bbox;
                        e.format_class = r->cls;
                        e.span_begin = r->begin;
                        e.span_end = r->end;
                        out.entries.push_back(e);
                        first = false;
                    }
                    consumed = true;
                }
            } else if (body.substr(0, 4) == "NEW:" && !line_regions.empty()) {
                const BoxRegion* r = line_regions.front();
                if (r->cls == FormatClass::WellFormed && r->bbox) {
                    out.declared_new_objects.push_back(*r->bbox);
                } else {
                    ParsedEntry e;
                    e.bbox = r->bbox;
                    e.format_class = r->cls;
                    e.span_begin = r->begin;
                    e.span_end = r->end;
                    out.entries.push_back(e);
                }
                consumed = true;
            } else if (body.substr(0, 5) == "GONE:") {
                std::string_view rest = trim(body.substr(5));
                std::size_t d = 0;
                while (d < rest.size() && is_digit(rest[d])) ++d;
                if (d > 0 && d <= 9 && d == rest.size()) {
                    out.declared_disappeared.push_back(std::stoi(std::string(rest)));
                    consumed = true;
                }
            }

            if (!consumed && !line_regions.empty()) {
                for (const BoxRegion* r : line_regions) {
                    ParsedEntry e;
                    e.bbox = r->bbox;
                    e.format_class = r->cls;
                    e.span_begin = r->begin;
                    e.span_end = r->end;
                    out.entries.push_back(e);
                }
                consumed = true;
            }
        }

        if (!consumed && !body.empty()) {
            if (!first_residual) out.residual_text += '\n';
            out.residual_text += std::string(body);
            first_residual = false;
        }

        if (line_end == text.size()) break;
        line_start = line_end + 1;
    }
    return out;
}

// --- frame blocks ---------------------------------------------------------

// Multi-frame answers use one block per frame introduced by a
// "Frame <n>:" line, n being 1-based within the window.
inline std::string render_frame_heading(int one_based_frame) {
    return "Frame " + std::to_string(one_based_frame) + ":";
}

// Splits a multi-frame response into per-block text. Returns exactly
// expected_frames blocks; content before the first heading or under an
// out-of-range heading is dropped.
inline std::vector<std::string> split_frame_blocks(std::string_view text, int expected_frames) {
    using namespace grammar_detail;
    std::vector<std::string> blocks(static_cast<std::size_t>(std::max(expected_frames, 0)));
    int current = -1;  // 0-based block index, -1 = preamble
    std::size_t line_start = 0;
    while (line_start <= text.size()) {
        std::size_t line_end = text.find('\n', line_start);
        if (line_end == std::string_view::npos) line_end = text.size();
        std::string_view line = text.substr(line_start, line_end - line_start);
        std::string_view body = trim(line);

        bool heading = false;
        if (body.substr(0, 6) == "Frame ") {
            std::string_view rest = body.substr(6);
            std::size_t d = 0;
            while (d < rest.size() && is_digit(rest[d])) ++d;
            if (d > 0 && d <= 9 && d + 1 == rest.size() && rest[d] == ':') {
                int n = std::stoi(std::string(rest.substr(0, d)));
                current = (n >= 1 && n <= expected_frames) ? n - 1 : -1;
                heading = true;
            }
        }
        if (!heading && current >= 0 && !body.empty()) {
            auto& blk = blocks[static_cast<std::size_t>(current)];
            if (!blk.empty()) blk += '\n';
            blk += std::string(body);
        }

        if (line_end == text.size()) break;
        line_start = line_end + 1;
    }
    return blocks;
}

}  // namespace vltrack
