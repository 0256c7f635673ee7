// vltrack: build dialogue samples, run windowed tracking inference against a
// chat-completion backend (or the ground-truth oracle), score responses, and
// evaluate tracking/caption metrics.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "vltrack/dialogue.hpp"
#include "vltrack/driver.hpp"
#include "vltrack/http_backend.hpp"
#include "vltrack/ingest.hpp"
#include "vltrack/oracle.hpp"
#include "vltrack/report.hpp"
#include "vltrack/reward.hpp"
#include "vltrack/sample_io.hpp"
#include "vltrack/synth.hpp"
#include "vltrack/track_metrics.hpp"

namespace fs = std::filesystem;
using namespace vltrack;

namespace {

constexpr const char* kApiKeyEnv = "VLTRACK_API_KEY";

// exit codes: 0 ok, 1 partial per-sequence failures, 2 configuration error
constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitConfig = 2;

struct CommonOptions {
    std::string dataset;
    std::string task = "mot";
    int window = 0;  // 0 = task default
    std::uint64_t seed = 1;
};

int effective_window(const CommonOptions& opt, TaskKind task) {
    if (opt.window > 0) return opt.window;
    return is_caption_task(task) ? kCaptionWindowLen : kTrackingWindowLen;
}

TaskKind parse_task(const std::string& name) {
    const auto task = task_kind_from_string(name);
    if (!task) throw CLI::ValidationError("--task", "unknown task '" + name + "'");
    return *task;
}

struct LoadedSequence {
    SequenceLayout layout;
    TrackSet gt;
    SequenceMeta meta;
};

LoadedSequence load_sequence(const SequenceLayout& layout,
                             std::optional<std::string> view_id = std::nullopt) {
    LoadedSequence out;
    out.layout = layout;
    out.gt = load_mot_gt(layout.gt_file, layout.image_size, layout.frame_count, {},
                         layout.sequence_id);
    out.meta = load_sequence_meta(layout, out.gt, std::move(view_id));
    return out;
}

SequenceInfo sequence_info(const SequenceLayout& layout) {
    SequenceInfo info;
    info.sequence_id = layout.sequence_id;
    info.image_size = layout.image_size;
    const auto src = layout.image_source();
    for (int f = 0; f < layout.frame_count; ++f) info.frame_refs.push_back(src.ref(f));
    return info;
}

// runs jobs over [0, n) with at most `jobs` workers; exceptions surface as
// per-item error strings
std::vector<std::string> parallel_for(int n, int jobs,
                                      const std::function<void(int)>& work) {
    std::vector<std::string> errors(static_cast<std::size_t>(n));
    std::atomic<int> next{0};
    auto runner = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                work(i);
            } catch (const std::exception& e) {
                errors[static_cast<std::size_t>(i)] = e.what();
            }
        }
    };
    const int workers = std::max(1, std::min(jobs, n));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(runner);
    for (auto& t : pool) t.join();
    return errors;
}

// ---------------------------------------------------------------------------
// synth: write a synthetic dataset in the expected on-disk layout
// ---------------------------------------------------------------------------

struct SynthCmd {
    std::string out;
    int sequences = 3;
    int objects = 5;
    int frames = 64;
    int views = 1;
    std::uint64_t seed = 1;
    bool captions = false;
    bool expressions = false;
};

void write_synth_sequence(const fs::path& root, const SynthSequence& synth, double frame_rate) {
    const fs::path dir = root / synth.tracks.sequence_id;
    fs::create_directories(dir / "gt");
    std::ofstream ini(dir / "seqinfo.ini");
    ini << "[Sequence]\nname=" << synth.tracks.sequence_id << "\nimDir=img1\nframeRate="
        << frame_rate << "\nseqLength=" << synth.tracks.frame_count << "\nimWidth="
        << synth.tracks.image_size.width << "\nimHeight=" << synth.tracks.image_size.height
        << "\nimExt=.jpg\n";

    // gt rows straight from the tracks
    std::ofstream gt(dir / "gt" / "gt.txt");
    std::map<std::pair<int, int>, BBox> ordered;
    for (const auto& [id, frames] : synth.tracks.tracklets) {
        for (const auto& [f, box] : frames) ordered[{f, id}] = box;
    }
    char buf[160];
    for (const auto& [key, box] : ordered) {
        const PixelBox px = denormalize_bbox(box, synth.tracks.image_size);
        std::snprintf(buf, sizeof(buf), "%d,%d,%.2f,%.2f,%.2f,%.2f,1,1,1\n", key.first + 1,
                      key.second, px.x, px.y, px.w, px.h);
        gt << buf;
    }

    if (synth.meta.captions) write_captions(*synth.meta.captions, dir / "captions.json");
    if (!synth.meta.expressions.empty()) {
        nlohmann::ordered_json j = nlohmann::ordered_json::array();
        for (const auto& e : synth.meta.expressions) {
            nlohmann::ordered_json o;
            o["id"] = e.id;
            o["text"] = e.text;
            o["targets"] = e.track_ids;
            j.push_back(std::move(o));
        }
        std::ofstream(dir / "expressions.json") << j.dump(2) << '\n';
    }
}

int cmd_synth(const SynthCmd& cmd) {
    fs::create_directories(cmd.out);
    SynthConfig cfg;
    cfg.num_objects = cmd.objects;
    cfg.num_frames = cmd.frames;
    cfg.with_captions = cmd.captions;
    cfg.with_expressions = cmd.expressions;

    nlohmann::ordered_json views_json = nlohmann::ordered_json::array();
    for (int s = 0; s < cmd.sequences; ++s) {
        char name[32];
        std::snprintf(name, sizeof(name), "seq%02d", s + 1);
        if (cmd.views <= 1) {
            cfg.seed = cmd.seed + static_cast<std::uint64_t>(s);
            write_synth_sequence(cmd.out, make_synth_sequence(name, cfg), 20.0);
            std::cout << "wrote sequence " << name << "\n";
        } else {
            nlohmann::ordered_json scene;
            scene["scene"] = name;
            auto& view_list = scene["views"] = nlohmann::ordered_json::array();
            for (int v = 0; v < cmd.views; ++v) {
                const std::string view_name(1, static_cast<char>('A' + v));
                const std::string seq_id = std::string(name) + "__" + view_name;
                cfg.seed = cmd.seed + static_cast<std::uint64_t>(s * 131 + v);
                write_synth_sequence(cmd.out, make_synth_sequence(seq_id, cfg), 20.0);
                view_list.push_back({{"sequence", seq_id}, {"view", view_name}});
            }
            views_json.push_back(std::move(scene));
            std::cout << "wrote scene " << name << " with " << cmd.views << " views\n";
        }
    }
    if (cmd.views > 1) {
        std::ofstream(fs::path(cmd.out) / "views.json") << views_json.dump(2) << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// build-samples
// ---------------------------------------------------------------------------

struct BuildSamplesCmd {
    CommonOptions common;
    std::string out;
    int samples_per_sequence = 4;  // pretext tasks only
};

int cmd_build_samples(const BuildSamplesCmd& cmd) {
    const TaskKind task = parse_task(cmd.common.task);
    const int window = effective_window(cmd.common, task);
    const auto dataset = discover_dataset(cmd.common.dataset);
    fs::create_directories(cmd.out);

    const fs::path jsonl_path = fs::path(cmd.out) / (cmd.common.task + ".jsonl");
    std::ofstream jsonl(jsonl_path);
    if (!jsonl) throw IngestError("cannot write " + jsonl_path.string());

    std::map<std::string, int> counts;
    auto emit = [&](const std::string& key, const ConversationSample& sample) {
        jsonl << sample_to_jsonl_line(sample) << '\n';
        ++counts[key];
    };

    if (task == TaskKind::Crmot) {
        if (dataset.view_groups.empty()) {
            throw IngestError("crmot samples need a views.json scene grouping");
        }
        for (const auto& group : dataset.view_groups) {
            std::vector<LoadedSequence> views;
            for (const auto& [seq_id, view_name] : group.views) {
                views.push_back(load_sequence(*dataset.find(seq_id), view_name));
            }
            std::vector<std::pair<const TrackSet*, const SequenceMeta*>> refs;
            std::vector<ImageSource> sources;
            for (const auto& v : views) {
                refs.emplace_back(&v.gt, &v.meta);
                sources.push_back(v.layout.image_source());
            }
            for (const auto& expr : views.front().meta.expressions) {
                emit(group.scene_id, build_crmot_sample(refs, expr.id, window, sources));
            }
        }
    } else {
        for (const auto& layout : dataset.sequences) {
            const auto seq = load_sequence(layout);
            const auto source = layout.image_source();
            switch (task) {
                case TaskKind::Mot: {
                    for (int start = 0; start < seq.gt.frame_count; start += window) {
                        const int len = std::min(window, seq.gt.frame_count - start);
                        const FrameWindow w{start, len};
                        if (seq.gt.detections_at(start).empty()) continue;
                        emit(layout.sequence_id,
                             build_mot_sample(seq.gt, w, cmd.common.seed ^ fnv1a64(layout.sequence_id) ^
                                                             static_cast<std::uint64_t>(start),
                                              source));
                    }
                    break;
                }
                case TaskKind::Rmot: {
                    for (int start = 0; start < seq.gt.frame_count; start += window) {
                        const int len = std::min(window, seq.gt.frame_count - start);
                        const FrameWindow w{start, len};
                        for (const auto& expr : seq.meta.expressions) {
                            emit(layout.sequence_id,
                                 build_rmot_sample(seq.gt, seq.meta, expr.id, w, source));
                        }
                    }
                    break;
                }
                case TaskKind::VideoCaption: {
                    if (!seq.meta.captions) continue;
                    emit(layout.sequence_id,
                         build_caption_sample(seq.gt, seq.meta, task, std::nullopt, source));
                    break;
                }
                case TaskKind::InstanceCaption: {
                    if (!seq.meta.captions) continue;
                    for (const auto& [id, _] : seq.meta.captions->instance_captions) {
                        if (!seq.gt.present(id, 0)) continue;
                        emit(layout.sequence_id,
                             build_caption_sample(seq.gt, seq.meta, task, id, source));
                    }
                    break;
                }
                case TaskKind::PretextDetection:
                case TaskKind::PretextLocationPrediction:
                case TaskKind::PretextReid: {
                    std::vector<const TrackSet*> pool;  // cross-video negatives for reid
                    for (int k = 0; k < cmd.samples_per_sequence; ++k) {
                        const auto sample_seed = cmd.common.seed ^ fnv1a64(layout.sequence_id) ^
                                                 (static_cast<std::uint64_t>(k) << 32);
                        try {
                            emit(layout.sequence_id,
                                 build_pretext_sample(seq.gt, task, sample_seed, source, pool));
                        } catch (const std::invalid_argument& e) {
                            std::cerr << "skipping " << layout.sequence_id << ": " << e.what()
                                      << "\n";
                            break;
                        }
                    }
                    break;
                }
                default:
                    throw CLI::ValidationError("--task", "unsupported sample task");
            }
        }
    }

    nlohmann::ordered_json manifest;
    manifest["task"] = cmd.common.task;
    manifest["window"] = window;
    manifest["seed"] = cmd.common.seed;
    int total = 0;
    auto& per_seq = manifest["sequences"] = nlohmann::ordered_json::object();
    for (const auto& [key, n] : counts) {
        per_seq[key] = n;
        total += n;
    }
    manifest["total"] = total;
    std::ofstream(fs::path(cmd.out) / "manifest.json") << manifest.dump(2) << '\n';
    std::cout << "wrote " << total << " samples to " << jsonl_path.string() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// track
// ---------------------------------------------------------------------------

struct TrackCmd {
    CommonOptions common;
    std::string backend = "oracle";
    std::string out;
    std::string endpoint;
    std::string model;
    std::string transcripts;  // replay source
    double jitter = 0.0;
    double dropout = 0.0;
    double swap = 0.0;
    double corrupt = 0.0;
    int jobs = 4;
};

PerturbationConfig perturbation_from(const TrackCmd& cmd) {
    PerturbationConfig pert;
    pert.jitter_sigma = cmd.jitter;
    pert.dropout_prob = cmd.dropout;
    pert.swap_prob = cmd.swap;
    pert.format_corruption_prob = cmd.corrupt;
    pert.rng_seed = cmd.common.seed;
    pert.validate();
    return pert;
}

std::unique_ptr<Backend> make_backend(const TrackCmd& cmd, const LoadedSequence& seq,
                                      const fs::path& replay_file) {
    if (cmd.backend == "oracle") {
        return std::make_unique<OracleBackend>(seq.gt, perturbation_from(cmd), seq.meta);
    }
    if (cmd.backend == "replay") {
        return std::make_unique<ReplayBackend>(read_transcript(replay_file));
    }
    HttpBackendConfig http;
    http.endpoint = cmd.endpoint;
    http.model = cmd.model;
    if (const char* key = std::getenv(kApiKeyEnv)) http.api_key = key;
    return std::make_unique<HttpBackend>(http);
}

void validate_track_cmd(const TrackCmd& cmd) {
    if (cmd.backend == "http") {
        if (cmd.endpoint.empty()) {
            throw CLI::ValidationError("--endpoint", "http backend needs an endpoint");
        }
        if (!std::getenv(kApiKeyEnv)) {
            throw CLI::ValidationError("--backend",
                                       std::string("http backend needs the ") + kApiKeyEnv +
                                           " environment variable");
        }
    }
    if (cmd.backend == "replay" && cmd.transcripts.empty()) {
        throw CLI::ValidationError("--transcripts", "replay backend needs a transcript directory");
    }
}

// caption inference: one request per caption target
CaptionGt run_caption_requests(const LoadedSequence& seq, Backend& backend, TaskKind task,
                               const DriverConfig& cfg) {
    const auto info = sequence_info(seq.layout);
    const int len = std::min(kCaptionWindowLen, static_cast<int>(info.frame_refs.size()));
    BackendRequest base;
    base.max_output_tokens = cfg.max_output_tokens;
    for (int f = 0; f < len; ++f) base.image_refs.push_back(ImageRef{info.frame_refs[f], {}});

    CaptionGt out;
    if (task == TaskKind::VideoCaption) {
        BackendRequest request = base;
        request.turns = {Turn{Role::User, std::string(kVideoCaptionQuery)}};
        out.video_caption = driver_detail::call_with_retries(backend, request, cfg.max_retries,
                                                             cfg.retry_backoff, 0);
        return out;
    }
    if (!seq.meta.captions) return out;
    for (const auto& [id, _] : seq.meta.captions->instance_captions) {
        const BBox* box = seq.gt.find(id, 0);
        if (!box) continue;
        BackendRequest request = base;
        request.turns = {Turn{Role::User, std::string(kInstanceCaptionQueryPrefix) +
                                              render_bbox_tag(*box) +
                                              " in the first frame of this sequence."}};
        out.instance_captions[id] = driver_detail::call_with_retries(
            backend, request, cfg.max_retries, cfg.retry_backoff, 0);
    }
    return out;
}

int cmd_track(const TrackCmd& cmd) {
    validate_track_cmd(cmd);
    const TaskKind task = parse_task(cmd.common.task);
    const auto dataset = discover_dataset(cmd.common.dataset);
    const fs::path out_dir(cmd.out);
    const fs::path transcript_dir = out_dir / "transcripts";
    fs::create_directories(transcript_dir);

    DriverConfig base_cfg;
    base_cfg.window_len = effective_window(cmd.common, task);
    base_cfg.task = task;

    struct Job {
        std::string label;
        std::function<void()> run;
    };
    std::vector<Job> jobs;
    std::mutex log_mutex;
    std::vector<std::string> summaries;

    auto add_summary = [&](const std::string& line) {
        std::lock_guard<std::mutex> lock(log_mutex);
        summaries.push_back(line);
    };

    if (task == TaskKind::Crmot) {
        if (dataset.view_groups.empty()) {
            throw IngestError("crmot tracking needs a views.json scene grouping");
        }
        for (const auto& group : dataset.view_groups) {
            jobs.push_back(Job{group.scene_id, [&, group]() {
                std::vector<LoadedSequence> views;
                for (const auto& [seq_id, view_name] : group.views) {
                    views.push_back(load_sequence(*dataset.find(seq_id), view_name));
                }
                for (const auto& expr : views.front().meta.expressions) {
                    std::vector<OracleBackend::View> oracle_views;
                    std::vector<SequenceInfo> infos;
                    for (const auto& v : views) {
                        const Expression* e = v.meta.find_expression(expr.id);
                        if (!e) {
                            throw IngestError("expression '" + expr.id + "' missing in view " +
                                              v.layout.sequence_id);
                        }
                        oracle_views.push_back(
                            OracleBackend::View{filter_tracks(v.gt, e->track_ids), v.meta});
                        infos.push_back(sequence_info(v.layout));
                    }
                    std::unique_ptr<Backend> backend;
                    const fs::path replay_file =
                        fs::path(cmd.transcripts) / (group.scene_id + "__" + expr.id + ".jsonl");
                    if (cmd.backend == "oracle") {
                        backend = std::make_unique<OracleBackend>(oracle_views,
                                                                  perturbation_from(cmd));
                    } else if (cmd.backend == "replay") {
                        backend = std::make_unique<ReplayBackend>(read_transcript(replay_file));
                    } else {
                        HttpBackendConfig http;
                        http.endpoint = cmd.endpoint;
                        http.model = cmd.model;
                        if (const char* key = std::getenv(kApiKeyEnv)) http.api_key = key;
                        backend = std::make_unique<HttpBackend>(http);
                    }
                    DriverConfig cfg = base_cfg;
                    cfg.expression = expr.text;
                    const auto run = run_crmot_scene(infos, *backend, cfg);
                    for (std::size_t v = 0; v < views.size(); ++v) {
                        write_results_csv(run.view_tracks[v],
                                          out_dir / (group.scene_id + "__" + expr.id + "__" +
                                                     views[v].layout.sequence_id + ".txt"));
                    }
                    write_transcript(run.transcript,
                                     transcript_dir / (group.scene_id + "__" + expr.id + ".jsonl"));
                    add_summary("scene " + group.scene_id + " expr " + expr.id + ": rounds=" +
                                std::to_string(run.rounds) + " malformed=" +
                                std::to_string(run.malformed_rounds) + " unknown_ids=" +
                                std::to_string(run.unknown_id_events));
                }
            }});
        }
    } else if (is_caption_task(task)) {
        for (const auto& layout : dataset.sequences) {
            jobs.push_back(Job{layout.sequence_id, [&, layout]() {
                const auto seq = load_sequence(layout);
                if (!seq.meta.captions) {
                    add_summary("sequence " + layout.sequence_id + ": no caption ground truth, skipped");
                    return;
                }
                const fs::path replay_file =
                    fs::path(cmd.transcripts) / (layout.sequence_id + ".captions.jsonl");
                auto backend = make_backend(cmd, seq, replay_file);
                const auto captions = run_caption_requests(seq, *backend, task, base_cfg);
                write_captions(captions, out_dir / (layout.sequence_id + ".captions.json"));
                add_summary("sequence " + layout.sequence_id + ": captions written");
            }});
        }
    } else if (task == TaskKind::Rmot) {
        for (const auto& layout : dataset.sequences) {
            jobs.push_back(Job{layout.sequence_id, [&, layout]() {
                const auto seq = load_sequence(layout);
                for (const auto& expr : seq.meta.expressions) {
                    LoadedSequence filtered = seq;
                    filtered.gt = filter_tracks(seq.gt, expr.track_ids);
                    const fs::path replay_file =
                        fs::path(cmd.transcripts) /
                        (layout.sequence_id + "__" + expr.id + ".jsonl");
                    auto backend = make_backend(cmd, filtered, replay_file);
                    DriverConfig cfg = base_cfg;
                    cfg.expression = expr.text;
                    const auto run = run_sequence(sequence_info(layout), *backend, cfg);
                    write_results_csv(run.tracks,
                                      out_dir / (layout.sequence_id + "__" + expr.id + ".txt"));
                    write_transcript(run.transcript,
                                     transcript_dir /
                                         (layout.sequence_id + "__" + expr.id + ".jsonl"));
                    add_summary("sequence " + layout.sequence_id + " expr " + expr.id +
                                ": rounds=" + std::to_string(run.rounds) + " detections=" +
                                std::to_string(run.tracks.total_detections()));
                }
            }});
        }
    } else {
        for (const auto& layout : dataset.sequences) {
            jobs.push_back(Job{layout.sequence_id, [&, layout]() {
                const auto seq = load_sequence(layout);
                const fs::path replay_file =
                    fs::path(cmd.transcripts) / (layout.sequence_id + ".jsonl");
                auto backend = make_backend(cmd, seq, replay_file);
                const auto run = run_sequence(sequence_info(layout), *backend, base_cfg);
                write_results_csv(run.tracks, out_dir / (layout.sequence_id + ".txt"));
                write_transcript(run.transcript,
                                 transcript_dir / (layout.sequence_id + ".jsonl"));
                add_summary("sequence " + layout.sequence_id + ": rounds=" +
                            std::to_string(run.rounds) + " malformed=" +
                            std::to_string(run.malformed_rounds) + " unknown_ids=" +
                            std::to_string(run.unknown_id_events) + " detections=" +
                            std::to_string(run.tracks.total_detections()));
            }});
        }
    }

    const auto errors = parallel_for(static_cast<int>(jobs.size()), cmd.jobs,
                                     [&](int i) { jobs[static_cast<std::size_t>(i)].run(); });

    std::sort(summaries.begin(), summaries.end());
    for (const auto& line : summaries) std::cout << line << "\n";
    int failed = 0;
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i].empty()) {
            std::cerr << "FAILED " << jobs[i].label << ": " << errors[i] << "\n";
            ++failed;
        }
    }
    if (failed > 0) {
        std::cerr << failed << " of " << jobs.size() << " work items failed\n";
        return kExitPartial;
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateCmd {
    CommonOptions common;
    std::string pred;
    std::string out = "report.json";
    std::string csv;
};

TrackSet load_pred_or_empty(const fs::path& file, const TrackSet& gt) {
    if (!fs::exists(file)) {
        std::cerr << "warning: no prediction at " << file.string()
                  << "; scoring as all misses\n";
        TrackSet empty;
        empty.sequence_id = gt.sequence_id;
        empty.frame_count = gt.frame_count;
        empty.image_size = gt.image_size;
        return empty;
    }
    return load_results_csv(file, gt.image_size, gt.frame_count, gt.sequence_id);
}

int cmd_evaluate(const EvaluateCmd& cmd) {
    const TaskKind task = parse_task(cmd.common.task);
    const auto dataset = discover_dataset(cmd.common.dataset);
    const fs::path pred_dir(cmd.pred);
    MetricReport report;

    if (task == TaskKind::Mot) {
        for (const auto& layout : dataset.sequences) {
            const auto seq = load_sequence(layout);
            const auto pred = load_pred_or_empty(pred_dir / (layout.sequence_id + ".txt"), seq.gt);
            SequenceReport row;
            row.id = layout.sequence_id;
            row.tracking = tracking_scores(pred, seq.gt);
            report.sequences.push_back(std::move(row));
        }
    } else if (task == TaskKind::Rmot) {
        for (const auto& layout : dataset.sequences) {
            const auto seq = load_sequence(layout);
            for (const auto& expr : seq.meta.expressions) {
                const auto gt = filter_tracks(seq.gt, expr.track_ids);
                const auto pred = load_pred_or_empty(
                    pred_dir / (layout.sequence_id + "__" + expr.id + ".txt"), gt);
                SequenceReport row;
                row.id = layout.sequence_id + "__" + expr.id;
                row.tracking = tracking_scores(pred, gt);
                report.sequences.push_back(std::move(row));
            }
        }
    } else if (task == TaskKind::Crmot) {
        if (dataset.view_groups.empty()) {
            throw IngestError("crmot evaluation needs a views.json scene grouping");
        }
        for (const auto& group : dataset.view_groups) {
            std::vector<LoadedSequence> views;
            for (const auto& [seq_id, view_name] : group.views) {
                views.push_back(load_sequence(*dataset.find(seq_id), view_name));
            }
            for (const auto& expr : views.front().meta.expressions) {
                std::vector<TrackSet> gts, preds;
                for (const auto& v : views) {
                    const Expression* e = v.meta.find_expression(expr.id);
                    if (!e) {
                        throw IngestError("expression '" + expr.id + "' missing in view " +
                                          v.layout.sequence_id);
                    }
                    auto gt = filter_tracks(v.gt, e->track_ids);
                    preds.push_back(load_pred_or_empty(
                        pred_dir / (group.scene_id + "__" + expr.id + "__" +
                                    v.layout.sequence_id + ".txt"),
                        gt));
                    gts.push_back(std::move(gt));
                }
                SequenceReport row;
                row.id = group.scene_id + "__" + expr.id;
                row.cross_view = crmot_scores(preds, gts, identity_cross_view_map(gts));
                report.sequences.push_back(std::move(row));
            }
        }
    } else if (is_caption_task(task)) {
        // corpus document frequencies over the ground-truth reference corpus
        std::vector<LoadedSequence> seqs;
        for (const auto& layout : dataset.sequences) {
            auto seq = load_sequence(layout);
            if (seq.meta.captions) seqs.push_back(std::move(seq));
        }
        std::vector<std::vector<TokenList>> corpus;
        for (const auto& seq : seqs) {
            if (task == TaskKind::VideoCaption) {
                corpus.push_back({tokenize_caption(seq.meta.captions->video_caption)});
            } else {
                for (const auto& [id, text] : seq.meta.captions->instance_captions) {
                    corpus.push_back({tokenize_caption(text)});
                }
            }
        }
        if (corpus.empty()) throw IngestError("no caption ground truth in the dataset");
        const auto idf = build_corpus_idf(corpus);

        for (const auto& seq : seqs) {
            const fs::path file = pred_dir / (seq.layout.sequence_id + ".captions.json");
            std::optional<CaptionGt> pred;
            if (fs::exists(file)) {
                pred = load_captions(file);
            } else {
                std::cerr << "warning: no captions at " << file.string() << "; scoring zeros\n";
            }
            SequenceReport row;
            row.id = seq.layout.sequence_id;
            if (task == TaskKind::VideoCaption) {
                CaptionScores s;
                if (pred) {
                    s = caption_scores(tokenize_caption(pred->video_caption),
                                       {tokenize_caption(seq.meta.captions->video_caption)}, idf);
                }
                row.video_caption = s;
            } else {
                CaptionScores acc;
                int n = 0;
                for (const auto& [id, gt_text] : seq.meta.captions->instance_captions) {
                    CaptionScores s;
                    if (pred && pred->instance_captions.count(id)) {
                        s = caption_scores(tokenize_caption(pred->instance_captions.at(id)),
                                           {tokenize_caption(gt_text)}, idf);
                    }
                    acc.bleu4 += s.bleu4;
                    acc.rouge_l += s.rouge_l;
                    acc.meteor += s.meteor;
                    acc.cider_d += s.cider_d;
                    ++n;
                }
                if (n > 0) {
                    acc.bleu4 /= n;
                    acc.rouge_l /= n;
                    acc.meteor /= n;
                    acc.cider_d /= n;
                }
                row.instance_caption = acc;
            }
            report.sequences.push_back(std::move(row));
        }
    } else {
        throw CLI::ValidationError("--task", "unsupported evaluation task");
    }

    write_report_json(report, cmd.out);
    if (!cmd.csv.empty()) write_report_csv(report, cmd.csv);
    std::cout << report_to_json(report)["aggregate"].dump(2) << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// reward
// ---------------------------------------------------------------------------

struct RewardCmd {
    std::string input;
    std::string output;
    int stage = 1;
    int group_size = 0;
};

int cmd_reward(const RewardCmd& cmd) {
    std::ifstream in(cmd.input);
    if (!in) throw IngestError("cannot open " + cmd.input);
    std::ofstream out(cmd.output);
    if (!out) throw IngestError("cannot write " + cmd.output);

    RewardConfig cfg;
    cfg.stage = cmd.stage == 4 ? RewardStage::Stage4 : RewardStage::Stage1;

    struct Scored {
        nlohmann::ordered_json line;
        double reward;
    };
    std::vector<Scored> scored;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::ordered_json j;
        try {
            j = nlohmann::ordered_json::parse(line);
            const std::string response = j.at("response").get<std::string>();
            const auto& gt = j.at("gt_bbox");
            const auto box = make_bbox(gt.at(0).get<double>(), gt.at(1).get<double>(),
                                       gt.at(2).get<double>(), gt.at(3).get<double>());
            if (!box) throw std::invalid_argument("gt_bbox is not a valid box");
            const auto outcome = combined_reward(response, *box, cfg);
            j["format_class"] = to_string(outcome.format_class);
            j["format_reward"] = outcome.format_reward;
            j["iou"] = outcome.iou;
            j["reward"] = outcome.total;
            scored.push_back(Scored{std::move(j), outcome.total});
        } catch (const std::exception& e) {
            throw IngestError(cmd.input + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }

    if (cmd.group_size > 0) {
        if (cmd.group_size < 2) {
            throw CLI::ValidationError("--group-size", "groups need at least 2 members");
        }
        if (scored.size() % static_cast<std::size_t>(cmd.group_size) != 0) {
            throw CLI::ValidationError("--group-size",
                                       "input has " + std::to_string(scored.size()) +
                                           " lines, not a multiple of the group size");
        }
        for (std::size_t base = 0; base < scored.size();
             base += static_cast<std::size_t>(cmd.group_size)) {
            std::vector<double> rewards;
            for (int k = 0; k < cmd.group_size; ++k) {
                rewards.push_back(scored[base + static_cast<std::size_t>(k)].reward);
            }
            const auto advantages = group_advantages(rewards);
            for (int k = 0; k < cmd.group_size; ++k) {
                scored[base + static_cast<std::size_t>(k)].line["advantage"] =
                    advantages[static_cast<std::size_t>(k)];
            }
        }
    }

    for (const auto& s : scored) out << s.line.dump() << '\n';
    std::cout << "scored " << scored.size() << " responses\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vision-language tracking harness"};
    app.set_config("--config");
    app.require_subcommand(1);

    const std::vector<std::string> track_tasks = {"mot", "rmot", "crmot", "video-caption",
                                                  "instance-caption"};
    const std::vector<std::string> sample_tasks = {"mot",
                                                   "rmot",
                                                   "crmot",
                                                   "video-caption",
                                                   "instance-caption",
                                                   "pretext-detection",
                                                   "pretext-location",
                                                   "pretext-reid"};

    SynthCmd synth;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
    synth_cmd->add_option("--out", synth.out, "output dataset root")->required();
    synth_cmd->add_option("--sequences", synth.sequences, "number of sequences (or scenes)");
    synth_cmd->add_option("--objects", synth.objects, "objects per sequence");
    synth_cmd->add_option("--frames", synth.frames, "frames per sequence");
    synth_cmd->add_option("--views", synth.views, "views per scene (>1 writes views.json)");
    synth_cmd->add_option("--seed", synth.seed, "generation seed");
    synth_cmd->add_flag("--captions", synth.captions, "write caption ground truth");
    synth_cmd->add_flag("--expressions", synth.expressions, "write referring expressions");

    BuildSamplesCmd build;
    auto* build_cmd = app.add_subcommand("build-samples", "emit dialogue training samples");
    build_cmd->add_option("--dataset", build.common.dataset, "dataset root")->required();
    build_cmd->add_option("--task", build.common.task, "sample kind")
        ->check(CLI::IsMember(sample_tasks));
    build_cmd->add_option("--window", build.common.window,
                          "frames per sample (default 16, captions 32)");
    build_cmd->add_option("--seed", build.common.seed, "sampling seed");
    build_cmd->add_option("--out", build.out, "output directory")->required();
    build_cmd->add_option("--samples-per-sequence", build.samples_per_sequence,
                          "pretext samples per sequence");

    TrackCmd track;
    auto* track_cmd = app.add_subcommand("track", "run multi-round tracking inference");
    track_cmd->add_option("--dataset", track.common.dataset, "dataset root")->required();
    track_cmd->add_option("--task", track.common.task, "tracking task")
        ->check(CLI::IsMember(track_tasks));
    track_cmd->add_option("--window", track.common.window,
                          "frames per round (default 16, captions 32)");
    track_cmd->add_option("--backend", track.backend, "completion backend")
        ->check(CLI::IsMember({"oracle", "http", "replay"}));
    track_cmd->add_option("--jitter", track.jitter, "oracle box jitter sigma");
    track_cmd->add_option("--dropout", track.dropout, "oracle box dropout probability");
    track_cmd->add_option("--swap", track.swap, "oracle id swap probability");
    track_cmd->add_option("--corrupt", track.corrupt, "oracle format corruption probability");
    track_cmd->add_option("--seed", track.common.seed, "oracle rng seed");
    track_cmd->add_option("--endpoint", track.endpoint, "chat-completion endpoint URL");
    track_cmd->add_option("--model", track.model, "model name for http requests");
    track_cmd->add_option("--transcripts", track.transcripts,
                          "transcript directory for --backend replay");
    track_cmd->add_option("--out", track.out, "output directory")->required();
    track_cmd->add_option("--jobs", track.jobs, "concurrent sequences")
        ->check(CLI::PositiveNumber);

    EvaluateCmd evaluate;
    auto* eval_cmd = app.add_subcommand("evaluate", "score predictions against ground truth");
    eval_cmd->add_option("--dataset", evaluate.common.dataset, "dataset root")->required();
    eval_cmd->add_option("--task", evaluate.common.task, "task to score")
        ->check(CLI::IsMember(track_tasks));
    eval_cmd->add_option("--pred", evaluate.pred, "prediction directory")->required();
    eval_cmd->add_option("--out", evaluate.out, "report JSON path");
    eval_cmd->add_option("--csv", evaluate.csv, "optional CSV export path");

    RewardCmd reward;
    auto* reward_cmd = app.add_subcommand("reward", "score a JSONL file of responses");
    reward_cmd->add_option("--input", reward.input, "JSONL of {response, gt_bbox}")->required();
    reward_cmd->add_option("--output", reward.output, "scored JSONL path")->required();
    reward_cmd->add_option("--stage", reward.stage, "reward stage")
        ->check(CLI::IsMember({1, 4}));
    reward_cmd->add_option("--group-size", reward.group_size,
                           "append group-relative advantages over consecutive groups");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (synth_cmd->parsed()) return cmd_synth(synth);
        if (build_cmd->parsed()) return cmd_build_samples(build);
        if (track_cmd->parsed()) return cmd_track(track);
        if (eval_cmd->parsed()) return cmd_evaluate(evaluate);
        if (reward_cmd->parsed()) return cmd_reward(reward);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IngestError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPartial;
    }
    return kExitConfig;
}
