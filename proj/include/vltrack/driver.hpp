#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "vltrack/assignment.hpp"
#include "vltrack/dialogue.hpp"
#include "vltrack/grammar.hpp"
#include "vltrack/track_set.hpp"

namespace vltrack {

// --- backend contract -----------------------------------------------------

struct BackendRequest {
    std::vector<ImageRef> image_refs;
    std::vector<Turn> turns;  // non-empty, last turn is user
    int max_output_tokens = kMaxOutputTokens;
};

struct BackendError : std::runtime_error {
    bool retryable;
    explicit BackendError(const std::string& what, bool retryable_ = true)
        : std::runtime_error(what), retryable(retryable_) {}
};

// Completion backend. Implementations must tolerate concurrent calls from
// distinct sequences; calls belonging to one sequence arrive serially.
class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string complete(const BackendRequest& request) = 0;
};

// Raised when a sequence has to be abandoned; names the failing round.
struct SequenceError : std::runtime_error {
    int round;
    SequenceError(const std::string& what, int round_) : std::runtime_error(what), round(round_) {}
};

// --- tracker state ----------------------------------------------------------

struct TrackerState {
    std::map<int, BBox> active;  // id -> last confirmed box
    std::set<int> retired;
    int next_id = 1;
    int frames_emitted = 0;
    // While open (driver keeps it open through the first round), responses
    // may introduce their own id numbering and it is adopted verbatim.
    bool adoption_open = true;
    int unknown_id_events = 0;
};

// Folds one frame block into the tracker state and returns the detections
// it contributes. Only well-formed entries drive tracks; NEW allocates the
// next id, GONE retires, ids never seen before are re-allocated with a
// warning once adoption has closed.
inline std::vector<Detection> merge_round_results(TrackerState& state,
                                                  const ParsedResponse& parsed, int frame_index) {
    if (frame_index < 0) {
        throw std::invalid_argument("merge_round_results: negative frame index");
    }
    std::vector<Detection> out;
    std::set<int> seen_this_frame;

    auto emit = [&](int id, const BBox& box) {
        state.active[id] = box;
        state.next_id = std::max(state.next_id, id + 1);
        Detection d;
        d.frame_index = frame_index;
        d.track_id = id;
        d.bbox = box;
        out.push_back(std::move(d));
        seen_this_frame.insert(id);
    };

    for (const auto& entry : parsed.entries) {
        if (entry.format_class != FormatClass::WellFormed || !entry.bbox) continue;
        int id;
        if (entry.object_id) {
            const int claimed = *entry.object_id;
            if (seen_this_frame.count(claimed)) {
                ++state.unknown_id_events;  // duplicate id within one frame
                continue;
            }
            if (state.active.count(claimed)) {
                id = claimed;
            } else if (state.adoption_open && !state.retired.count(claimed)) {
                id = claimed;
            } else {
                ++state.unknown_id_events;
                id = state.next_id;
            }
        } else {
            id = state.next_id;  // bare box: a new track without a name
        }
        emit(id, *entry.bbox);
    }
    for (const auto& box : parsed.declared_new_objects) {
        emit(state.next_id, box);
    }
    for (int gone : parsed.declared_disappeared) {
        if (state.active.erase(gone)) {
            state.retired.insert(gone);
        } else {
            ++state.unknown_id_events;
        }
    }
    state.frames_emitted = std::max(state.frames_emitted, frame_index + 1);
    return out;
}

// --- round prompts ----------------------------------------------------------

inline constexpr std::string_view kFormatInstruction =
    "Report one block per frame:\n"
    "Frame <n>:\n"
    "ID <k>: <bbox>x,y,w,h</bbox>\n"
    "Use normalized coordinates with six decimals. Announce an object that first appears "
    "after the first frame with a line NEW: <bbox>x,y,w,h</bbox> in its entry frame, and "
    "report a disappeared object once with a line GONE: <k>.";

inline constexpr std::string_view kPriorHeading =
    "These are the tracked objects at the last frame before these images:";

namespace driver_detail {

inline std::string round_prompt(TaskKind task, const std::optional<std::string>& expression,
                                const std::string& prior_lines, int window_len) {
    std::string p = "You are given " + std::to_string(window_len) + " consecutive video frames.\n";
    if (prior_lines.empty()) {
        if (task == TaskKind::Rmot || task == TaskKind::Crmot) {
            p += "Track the objects described as \"" + expression.value_or("") +
                 "\" in this sequence.\n";
        } else {
            p += std::string(kMotQueryFirstFrame) + "\n";
            p += std::string(kMotQueryTrack) + "\n";
        }
        p += std::string(kMotQueryNewObjects) + "\n";
    } else {
        p += std::string(kPriorHeading) + "\n" + prior_lines + "\n";
        p += std::string(kMotQueryTrack) + "\n";
        p += std::string(kMotQueryNewObjects) + "\n";
    }
    p += kFormatInstruction;
    return p;
}

inline std::string call_with_retries(Backend& backend, const BackendRequest& request,
                                     int max_retries, std::chrono::milliseconds backoff,
                                     int round) {
    int attempt = 0;
    for (;;) {
        try {
            return backend.complete(request);
        } catch (const BackendError& e) {
            if (!e.retryable || attempt >= max_retries) {
                throw SequenceError("backend failed at round " + std::to_string(round) + ": " +
                                        e.what(),
                                    round);
            }
            std::this_thread::sleep_for(backoff * (1 << attempt));
            ++attempt;
        }
    }
}

inline std::string prior_lines_at(const TrackSet& tracks, int frame) {
    std::vector<Detection> dets;
    for (const auto& [id, box] : tracks.detections_at(frame)) {
        Detection d;
        d.frame_index = frame;
        d.track_id = id;
        d.bbox = box;
        dets.push_back(std::move(d));
    }
    return render_target_response(std::move(dets));
}

}  // namespace driver_detail

// --- sequence driver --------------------------------------------------------

struct SequenceInfo {
    std::string sequence_id;
    std::vector<std::string> frame_refs;  // index = 0-based frame
    ImageSize image_size;

    static SequenceInfo synthetic(const TrackSet& ts) {
        SequenceInfo info;
        info.sequence_id = ts.sequence_id;
        info.image_size = ts.image_size;
        const auto src = ImageSource::for_sequence(ts.sequence_id);
        for (int f = 0; f < ts.frame_count; ++f) info.frame_refs.push_back(src.ref(f));
        return info;
    }
};

struct DriverConfig {
    int window_len = kTrackingWindowLen;
    TaskKind task = TaskKind::Mot;
    std::optional<std::string> expression;
    std::optional<std::vector<Detection>> init;  // optional first-frame prior
    int max_retries = 3;
    std::chrono::milliseconds retry_backoff{250};
    int max_output_tokens = kMaxOutputTokens;
};

struct TranscriptEntry {
    int round = 0;
    BackendRequest request;
    std::string response;
};

struct SequenceRun {
    TrackSet tracks;
    int rounds = 0;
    int malformed_rounds = 0;   // responses with box content but nothing well-formed
    int unknown_id_events = 0;  // unknown/duplicate/stale ids in responses
    std::vector<TranscriptEntry> transcript;
};

// Runs one sequence through consecutive windows. Each round's prompt embeds
// the previous round's last-frame boxes; responses are folded into one
// TrackSet. Malformed responses contribute empty frames and are counted.
inline SequenceRun run_sequence(const SequenceInfo& seq, Backend& backend,
                                const DriverConfig& cfg) {
    if (seq.frame_refs.empty()) {
        throw std::invalid_argument("run_sequence: no frames in " + seq.sequence_id);
    }
    if (cfg.window_len < 2) {
        throw std::invalid_argument("run_sequence: window length must be at least 2");
    }
    if (cfg.task == TaskKind::Crmot) {
        throw std::invalid_argument("run_sequence: cross-view scenes go through run_crmot_scene");
    }
    if (cfg.task == TaskKind::Rmot && !cfg.expression) {
        throw std::invalid_argument("run_sequence: referring task needs an expression");
    }

    const int n = static_cast<int>(seq.frame_refs.size());
    SequenceRun run;
    run.tracks.sequence_id = seq.sequence_id;
    run.tracks.frame_count = n;
    run.tracks.image_size = seq.image_size;

    TrackerState state;
    std::string prior_lines;
    if (cfg.init) {
        std::vector<Detection> init = *cfg.init;
        for (const auto& d : init) {
            if (!d.track_id) {
                throw std::invalid_argument("run_sequence: init detections need track ids");
            }
            state.active[*d.track_id] = d.bbox;
            state.next_id = std::max(state.next_id, *d.track_id + 1);
        }
        state.adoption_open = false;
        prior_lines = render_target_response(std::move(init));
    }

    const int rounds = (n + cfg.window_len - 1) / cfg.window_len;
    for (int r = 0; r < rounds; ++r) {
        const int lo = r * cfg.window_len;
        const int hi = std::min(n, lo + cfg.window_len);
        const int len = hi - lo;

        BackendRequest request;
        request.max_output_tokens = cfg.max_output_tokens;
        for (int f = lo; f < hi; ++f) {
            request.image_refs.push_back(ImageRef{seq.frame_refs[static_cast<std::size_t>(f)], {}});
        }
        request.turns = {
            Turn{Role::User, driver_detail::round_prompt(cfg.task, cfg.expression, prior_lines, len)}};

        const std::string text = driver_detail::call_with_retries(backend, request, cfg.max_retries,
                                                                  cfg.retry_backoff, r);
        run.transcript.push_back(TranscriptEntry{r, request, text});

        const auto blocks = split_frame_blocks(text, len);
        bool any_well_formed = false;
        for (int j = 0; j < len; ++j) {
            const auto parsed = parse_response(blocks[static_cast<std::size_t>(j)]);
            if (parsed.has_well_formed_entry()) any_well_formed = true;
            for (const auto& d : merge_round_results(state, parsed, lo + j)) {
                run.tracks.insert(*d.track_id, d.frame_index, d.bbox);
            }
        }
        const auto cls = classify_format(text);
        if (!any_well_formed && cls != FormatClass::NoBox) ++run.malformed_rounds;

        state.adoption_open = false;  // numbering is fixed after the first round
        prior_lines = driver_detail::prior_lines_at(run.tracks, hi - 1);
    }

    run.rounds = rounds;
    run.unknown_id_events = state.unknown_id_events;
    return run;
}

// --- cross-view scenes --------------------------------------------------------

// Responses and priors for multi-view rounds are grouped per view:
//   View <name>:
//   Frame 1:
//   ...
inline std::string render_view_heading(const std::string& view_name) {
    return "View " + view_name + ":";
}

inline std::vector<std::pair<std::string, std::string>> split_view_blocks(std::string_view text) {
    std::vector<std::pair<std::string, std::string>> out;
    std::size_t line_start = 0;
    std::string current;
    std::string body;
    auto flush = [&]() {
        if (!current.empty()) out.emplace_back(current, body);
        body.clear();
    };
    while (line_start <= text.size()) {
        std::size_t line_end = text.find('\n', line_start);
        if (line_end == std::string_view::npos) line_end = text.size();
        std::string_view line = text.substr(line_start, line_end - line_start);
        std::string_view body_line = grammar_detail::trim(line);
        if (body_line.rfind("View ", 0) == 0 && !body_line.empty() && body_line.back() == ':') {
            flush();
            current = std::string(body_line.substr(5, body_line.size() - 6));
        } else if (!current.empty() && !body_line.empty()) {
            if (!body.empty()) body += '\n';
            body += std::string(body_line);
        }
        if (line_end == text.size()) break;
        line_start = line_end + 1;
    }
    flush();
    return out;
}

struct CrmotRun {
    std::vector<TrackSet> view_tracks;
    int rounds = 0;
    int malformed_rounds = 0;
    int unknown_id_events = 0;
    std::vector<TranscriptEntry> transcript;
};

// Multi-view referring tracking: every round carries an equal per-view
// chunk of frames (window budget divided by the view count) with per-view
// prior blocks, and one shared id space across views.
inline CrmotRun run_crmot_scene(const std::vector<SequenceInfo>& views, Backend& backend,
                                const DriverConfig& cfg) {
    if (views.size() < 2) {
        throw std::invalid_argument("run_crmot_scene: need at least two views");
    }
    if (!cfg.expression) {
        throw std::invalid_argument("run_crmot_scene: cross-view tracking needs an expression");
    }
    const int n = static_cast<int>(views.front().frame_refs.size());
    for (const auto& v : views) {
        if (static_cast<int>(v.frame_refs.size()) != n || n == 0) {
            throw std::invalid_argument("run_crmot_scene: views must share one non-empty frame count");
        }
    }
    const int chunk = std::max(1, cfg.window_len / static_cast<int>(views.size()));

    CrmotRun run;
    for (const auto& v : views) {
        TrackSet ts;
        ts.sequence_id = v.sequence_id;
        ts.frame_count = n;
        ts.image_size = v.image_size;
        run.view_tracks.push_back(std::move(ts));
    }

    TrackerState state;
    std::vector<std::string> prior(views.size());
    const int rounds = (n + chunk - 1) / chunk;
    for (int r = 0; r < rounds; ++r) {
        const int lo = r * chunk;
        const int hi = std::min(n, lo + chunk);
        const int len = hi - lo;

        BackendRequest request;
        request.max_output_tokens = cfg.max_output_tokens;
        std::string prior_blocks;
        std::string layout;
        int ref_pos = 1;
        for (std::size_t v = 0; v < views.size(); ++v) {
            for (int f = lo; f < hi; ++f) {
                request.image_refs.push_back(
                    ImageRef{views[v].frame_refs[static_cast<std::size_t>(f)], {}});
            }
            layout += render_view_heading(views[v].sequence_id) + " images " +
                      std::to_string(ref_pos) + "-" + std::to_string(ref_pos + len - 1) + ".\n";
            ref_pos += len;
            if (!prior[v].empty()) {
                prior_blocks += render_view_heading(views[v].sequence_id) + "\n" + prior[v] + "\n";
            }
        }

        std::string prompt = "You are given " + std::to_string(len) +
                             " consecutive frames from each of " + std::to_string(views.size()) +
                             " synchronized camera views.\n" + layout;
        prompt += "Track the objects described as \"" + *cfg.expression +
                  "\" across all views. Use the same ID for the same person in every view.\n";
        if (!prior_blocks.empty()) {
            prompt += std::string(kPriorHeading) + "\n" + prior_blocks;
        }
        prompt += std::string(kMotQueryNewObjects) + "\n";
        prompt += "Answer with one \"View <name>:\" section per view.\n";
        prompt += kFormatInstruction;
        request.turns = {Turn{Role::User, prompt}};

        const std::string text = driver_detail::call_with_retries(backend, request, cfg.max_retries,
                                                                  cfg.retry_backoff, r);
        run.transcript.push_back(TranscriptEntry{r, request, text});

        bool any_well_formed = false;
        const auto view_blocks = split_view_blocks(text);
        for (std::size_t v = 0; v < views.size(); ++v) {
            std::string body;
            for (const auto& [name, b] : view_blocks) {
                if (name == views[v].sequence_id) body = b;
            }
            const auto blocks = split_frame_blocks(body, len);
            for (int j = 0; j < len; ++j) {
                const auto parsed = parse_response(blocks[static_cast<std::size_t>(j)]);
                if (parsed.has_well_formed_entry()) any_well_formed = true;
                for (const auto& d : merge_round_results(state, parsed, lo + j)) {
                    run.view_tracks[v].insert(*d.track_id, d.frame_index, d.bbox);
                }
            }
            prior[v] = driver_detail::prior_lines_at(run.view_tracks[v], hi - 1);
        }
        const auto cls = classify_format(text);
        if (!any_well_formed && cls != FormatClass::NoBox) ++run.malformed_rounds;
        state.adoption_open = false;
    }

    run.rounds = rounds;
    run.unknown_id_events = state.unknown_id_events;
    return run;
}

// Replays recorded responses in order; useful to re-score an expensive run
// without network access.
class ReplayBackend : public Backend {
public:
    explicit ReplayBackend(std::vector<TranscriptEntry> transcript)
        : transcript_(std::move(transcript)) {}

    std::string complete(const BackendRequest&) override {
        if (next_ >= transcript_.size()) {
            throw BackendError("replay transcript exhausted", /*retryable=*/false);
        }
        return transcript_[next_++].response;
    }

private:
    std::vector<TranscriptEntry> transcript_;
    std::size_t next_ = 0;
};

}  // namespace vltrack
