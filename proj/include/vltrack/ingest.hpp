#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "vltrack/driver.hpp"
#include "vltrack/sample_io.hpp"
#include "vltrack/track_set.hpp"

namespace vltrack {

struct IngestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- dataset layout ---------------------------------------------------------

struct SequenceLayout {
    std::string sequence_id;
    std::filesystem::path dir;
    std::filesystem::path gt_file;
    std::filesystem::path image_dir;
    std::string image_ext = ".jpg";
    int frame_count = 0;
    double frame_rate = 0.0;
    ImageSize image_size;
    std::optional<std::filesystem::path> expressions_file;
    std::optional<std::filesystem::path> captions_file;

    ImageSource image_source() const {
        return ImageSource{image_dir.string(), image_ext, 6};
    }
};

struct ViewGroup {
    std::string scene_id;
    std::vector<std::pair<std::string, std::string>> views;  // (sequence_id, view name)
};

struct DatasetLayout {
    std::filesystem::path root;
    std::vector<SequenceLayout> sequences;
    std::vector<ViewGroup> view_groups;

    const SequenceLayout* find(const std::string& sequence_id) const {
        for (const auto& s : sequences) {
            if (s.sequence_id == sequence_id) return &s;
        }
        return nullptr;
    }
};

namespace ingest_detail {

inline std::string trim_copy(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return s.substr(b, e - b);
}

}  // namespace ingest_detail

// seqinfo.ini: INI-style key/value pairs under a [Sequence] section.
inline SequenceLayout load_seqinfo(const std::filesystem::path& sequence_dir) {
    const auto ini = sequence_dir / "seqinfo.ini";
    std::ifstream in(ini);
    if (!in) throw IngestError("cannot open " + ini.string());

    SequenceLayout layout;
    layout.dir = sequence_dir;
    layout.sequence_id = sequence_dir.filename().string();
    std::string im_dir = "img1";

    std::string line;
    while (std::getline(in, line)) {
        line = ingest_detail::trim_copy(line);
        if (line.empty() || line.front() == '[' || line.front() == ';' || line.front() == '#') {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = ingest_detail::trim_copy(line.substr(0, eq));
        const std::string value = ingest_detail::trim_copy(line.substr(eq + 1));
        try {
            if (key == "name") {
                layout.sequence_id = value;
            } else if (key == "imDir") {
                im_dir = value;
            } else if (key == "frameRate") {
                layout.frame_rate = std::stod(value);
            } else if (key == "seqLength") {
                layout.frame_count = std::stoi(value);
            } else if (key == "imWidth") {
                layout.image_size.width = std::stoi(value);
            } else if (key == "imHeight") {
                layout.image_size.height = std::stoi(value);
            } else if (key == "imExt") {
                layout.image_ext = value;
            }
        } catch (const std::exception&) {
            throw IngestError("bad value for '" + key + "' in " + ini.string());
        }
    }
    if (layout.frame_count <= 0 || layout.image_size.width <= 0 || layout.image_size.height <= 0) {
        throw IngestError(ini.string() + " must set seqLength, imWidth and imHeight");
    }
    layout.image_dir = sequence_dir / im_dir;
    layout.gt_file = sequence_dir / "gt" / "gt.txt";

    const auto expr = sequence_dir / "expressions.json";
    if (std::filesystem::exists(expr)) layout.expressions_file = expr;
    const auto caps = sequence_dir / "captions.json";
    if (std::filesystem::exists(caps)) layout.captions_file = caps;
    return layout;
}

inline std::vector<ViewGroup> load_views(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IngestError(path.string() + ": " + e.what());
    }
    std::vector<ViewGroup> groups;
    for (const auto& g : j) {
        ViewGroup group;
        group.scene_id = g.at("scene").get<std::string>();
        for (const auto& v : g.at("views")) {
            group.views.emplace_back(v.at("sequence").get<std::string>(),
                                     v.value("view", v.at("sequence").get<std::string>()));
        }
        if (group.views.empty()) {
            throw IngestError(path.string() + ": scene '" + group.scene_id + "' has no views");
        }
        groups.push_back(std::move(group));
    }
    return groups;
}

// Scans root for sequence directories (those carrying a seqinfo.ini) plus
// an optional views.json grouping file.
inline DatasetLayout discover_dataset(const std::filesystem::path& root) {
    if (!std::filesystem::is_directory(root)) {
        throw IngestError("dataset root '" + root.string() + "' is not a directory");
    }
    DatasetLayout layout;
    layout.root = root;
    std::vector<std::filesystem::path> dirs;
    for (const auto& entry : std::filesystem::directory_iterator(root)) {
        if (entry.is_directory() && std::filesystem::exists(entry.path() / "seqinfo.ini")) {
            dirs.push_back(entry.path());
        }
    }
    std::sort(dirs.begin(), dirs.end());
    for (const auto& dir : dirs) layout.sequences.push_back(load_seqinfo(dir));
    if (layout.sequences.empty()) {
        throw IngestError("no sequences (directories with seqinfo.ini) under " + root.string());
    }
    const auto views = root / "views.json";
    if (std::filesystem::exists(views)) {
        layout.view_groups = load_views(views);
        for (const auto& g : layout.view_groups) {
            for (const auto& [seq, _] : g.views) {
                if (!layout.find(seq)) {
                    throw IngestError("views.json references unknown sequence '" + seq + "'");
                }
            }
        }
    }
    return layout;
}

// --- ground truth / results CSV ----------------------------------------------

struct GtLoadOptions {
    bool pedestrians_only = true;        // keep only pedestrian class rows
    std::set<int> pedestrian_classes{1};
    bool skip_zero_conf = true;
};

// MOT-style CSV: frame,id,bb_left,bb_top,bb_width,bb_height,conf,class,visibility
// Frames are 1-based on disk and 0-based in memory. conf=0 rows are
// ignored; boxes fully outside the frame are dropped.
inline TrackSet load_mot_gt(const std::filesystem::path& path, ImageSize image_size,
                            int frame_count = 0, const GtLoadOptions& options = {},
                            const std::string& sequence_id = "") {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open " + path.string());

    struct Row {
        int frame;
        int id;
        BBox box;
    };
    std::vector<Row> rows;
    std::map<std::pair<int, int>, int> first_line;  // (frame,id) -> line number
    int max_frame = 0;

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string body = ingest_detail::trim_copy(line);
        if (body.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(body);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(ingest_detail::trim_copy(field));
        if (fields.size() < 9) {
            throw IngestError(path.string() + ":" + std::to_string(line_no) +
                              ": expected 9 comma-separated fields, got " +
                              std::to_string(fields.size()));
        }
        int frame, id, cls;
        double left, top, width, height, conf;
        try {
            frame = std::stoi(fields[0]);
            id = std::stoi(fields[1]);
            left = std::stod(fields[2]);
            top = std::stod(fields[3]);
            width = std::stod(fields[4]);
            height = std::stod(fields[5]);
            conf = std::stod(fields[6]);
            cls = std::stoi(fields[7]);
        } catch (const std::exception&) {
            throw IngestError(path.string() + ":" + std::to_string(line_no) +
                              ": unparseable numeric field");
        }
        if (frame < 1) {
            throw IngestError(path.string() + ":" + std::to_string(line_no) +
                              ": frame numbers start at 1");
        }
        if (options.skip_zero_conf && conf == 0.0) continue;
        if (options.pedestrians_only && !options.pedestrian_classes.count(cls)) continue;
        if (width <= 0.0 || height <= 0.0) {
            throw IngestError(path.string() + ":" + std::to_string(line_no) +
                              ": box size must be positive");
        }

        const auto key = std::make_pair(frame, id);
        auto [it, fresh] = first_line.emplace(key, line_no);
        if (!fresh) {
            throw IngestError(path.string() + ": duplicate (frame " + std::to_string(frame) +
                              ", id " + std::to_string(id) + ") at lines " +
                              std::to_string(it->second) + " and " + std::to_string(line_no));
        }
        const auto box = normalize_bbox(PixelBox{left, top, width, height}, image_size);
        if (!box) continue;  // fully outside the frame
        rows.push_back(Row{frame - 1, id, *box});
        max_frame = std::max(max_frame, frame);
    }

    TrackSet ts;
    ts.sequence_id = sequence_id.empty() ? path.stem().string() : sequence_id;
    ts.image_size = image_size;
    ts.frame_count = frame_count > 0 ? frame_count : max_frame;
    for (const auto& row : rows) {
        if (row.frame >= ts.frame_count) {
            throw IngestError(path.string() + ": frame " + std::to_string(row.frame + 1) +
                              " exceeds the declared sequence length " +
                              std::to_string(ts.frame_count));
        }
        ts.insert(row.id, row.frame, row.box);
    }
    return ts;
}

inline TrackSet load_results_csv(const std::filesystem::path& path, ImageSize image_size,
                                 int frame_count, const std::string& sequence_id) {
    GtLoadOptions options;
    options.pedestrians_only = false;
    options.skip_zero_conf = false;
    return load_mot_gt(path, image_size, frame_count, options, sequence_id);
}

// Pixel coordinates are reconstructed from the image size with two
// decimals, which keeps the load/write round trip within half a pixel.
inline void write_results_csv(const TrackSet& ts, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IngestError("cannot write " + path.string());
    std::map<std::pair<int, int>, BBox> ordered;  // (frame, id) -> box
    for (const auto& [id, frames] : ts.tracklets) {
        for (const auto& [f, box] : frames) ordered[{f, id}] = box;
    }
    char buf[160];
    for (const auto& [key, box] : ordered) {
        const PixelBox px = denormalize_bbox(box, ts.image_size);
        std::snprintf(buf, sizeof(buf), "%d,%d,%.2f,%.2f,%.2f,%.2f,1,1,1\n", key.first + 1,
                      key.second, px.x, px.y, px.w, px.h);
        out << buf;
    }
    if (!out) throw IngestError("failed writing " + path.string());
}

// --- expressions / captions ---------------------------------------------------

// expressions.json: [{"id": ..., "text": ..., "targets": [track ids]}]
inline std::vector<Expression> load_expressions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IngestError(path.string() + ": " + e.what());
    }
    std::vector<Expression> out;
    std::set<std::string> seen;
    for (const auto& e : j) {
        Expression expr;
        expr.id = e.at("id").is_string() ? e.at("id").get<std::string>()
                                         : std::to_string(e.at("id").get<long long>());
        expr.text = e.at("text").get<std::string>();
        for (const auto& t : e.at("targets")) expr.track_ids.insert(t.get<int>());
        if (!seen.insert(expr.id).second) {
            throw IngestError(path.string() + ": duplicate expression id '" + expr.id + "'");
        }
        out.push_back(std::move(expr));
    }
    return out;
}

// captions.json: {"video_caption": ..., "instances": {"<track id>": caption}}
inline CaptionGt load_captions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IngestError(path.string() + ": " + e.what());
    }
    CaptionGt captions;
    captions.video_caption = j.at("video_caption").get<std::string>();
    if (j.contains("instances")) {
        for (const auto& [key, value] : j.at("instances").items()) {
            try {
                captions.instance_captions[std::stoi(key)] = value.get<std::string>();
            } catch (const std::exception&) {
                throw IngestError(path.string() + ": instance key '" + key +
                                  "' is not a track id");
            }
        }
    }
    return captions;
}

inline void write_captions(const CaptionGt& captions, const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    j["video_caption"] = captions.video_caption;
    auto& instances = j["instances"] = nlohmann::ordered_json::object();
    for (const auto& [id, text] : captions.instance_captions) {
        instances[std::to_string(id)] = text;
    }
    std::ofstream out(path);
    if (!out) throw IngestError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

// Loads expressions/captions for a sequence and validates every referenced
// track id against the paired TrackSet.
inline SequenceMeta load_sequence_meta(const SequenceLayout& layout, const TrackSet& ts,
                                       std::optional<std::string> view_id = std::nullopt) {
    SequenceMeta meta;
    meta.sequence_id = layout.sequence_id;
    meta.view_id = std::move(view_id);
    if (layout.expressions_file) meta.expressions = load_expressions(*layout.expressions_file);
    if (layout.captions_file) meta.captions = load_captions(*layout.captions_file);
    validate_meta(meta, ts);
    return meta;
}

// --- transcripts ---------------------------------------------------------------

inline void write_transcript(const std::vector<TranscriptEntry>& entries,
                             const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IngestError("cannot write " + path.string());
    for (const auto& e : entries) {
        nlohmann::ordered_json j;
        j["round"] = e.round;
        auto& req = j["request"];
        auto& images = req["images"] = nlohmann::ordered_json::array();
        for (const auto& ref : e.request.image_refs) images.push_back(ref.path);
        auto& turns = req["turns"] = nlohmann::ordered_json::array();
        for (const auto& t : e.request.turns) {
            turns.push_back({{"role", role_to_string(t.role)}, {"text", t.text}});
        }
        req["max_output_tokens"] = e.request.max_output_tokens;
        j["response"] = e.response;
        out << j.dump() << '\n';
    }
    if (!out) throw IngestError("failed writing " + path.string());
}

inline std::vector<TranscriptEntry> read_transcript(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open " + path.string());
    std::vector<TranscriptEntry> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (ingest_detail::trim_copy(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw IngestError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        TranscriptEntry entry;
        entry.round = j.at("round").get<int>();
        const auto& req = j.at("request");
        for (const auto& img : req.at("images")) {
            entry.request.image_refs.push_back(ImageRef{img.get<std::string>(), {}});
        }
        for (const auto& t : req.at("turns")) {
            Turn turn;
            turn.role = t.at("role").get<std::string>() == "assistant" ? Role::Assistant : Role::User;
            turn.text = t.at("text").get<std::string>();
            entry.request.turns.push_back(std::move(turn));
        }
        entry.request.max_output_tokens = req.at("max_output_tokens").get<int>();
        entry.response = j.at("response").get<std::string>();
        entries.push_back(std::move(entry));
    }
    return entries;
}

}  // namespace vltrack
