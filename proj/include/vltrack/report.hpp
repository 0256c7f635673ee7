#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vltrack/caption_metrics.hpp"
#include "vltrack/track_metrics.hpp"

namespace vltrack {

struct SequenceReport {
    std::string id;  // sequence, sequence__expression, or scene id
    std::optional<TrackingScores> tracking;
    std::optional<CrossViewScores> cross_view;
    std::optional<CaptionScores> video_caption;
    std::optional<CaptionScores> instance_caption;
};

struct MetricReport {
    std::vector<SequenceReport> sequences;
};

namespace report_detail {

// tracking-style fractions are reported x100, caption metrics raw
inline nlohmann::ordered_json tracking_json(const TrackingScores& s) {
    nlohmann::ordered_json j;
    j["hota"] = s.hota * 100.0;
    j["det_a"] = s.det_a * 100.0;
    j["ass_a"] = s.ass_a * 100.0;
    j["mota"] = s.mota * 100.0;
    j["idf1"] = s.idf1 * 100.0;
    j["idsw"] = s.idsw;
    j["fp"] = s.fp;
    j["fn"] = s.fn;
    return j;
}

inline nlohmann::ordered_json cross_view_json(const CrossViewScores& s) {
    nlohmann::ordered_json j;
    j["cvr_idf1"] = s.cvr_idf1 * 100.0;
    j["cvrma"] = s.cvrma * 100.0;
    return j;
}

inline nlohmann::ordered_json caption_json(const CaptionScores& s) {
    nlohmann::ordered_json j;
    j["bleu4"] = s.bleu4;
    j["rouge_l"] = s.rouge_l;
    j["meteor"] = s.meteor;
    j["cider_d"] = s.cider_d;
    return j;
}

struct Mean {
    double sum = 0.0;
    int n = 0;
    void add(double v) {
        sum += v;
        ++n;
    }
    std::optional<double> get() const {
        if (n == 0) return std::nullopt;
        return sum / n;
    }
};

}  // namespace report_detail

inline nlohmann::ordered_json report_to_json(const MetricReport& report) {
    using report_detail::Mean;
    nlohmann::ordered_json j;
    auto& sequences = j["sequences"] = nlohmann::ordered_json::array();

    Mean hota, det_a, ass_a, mota, idf1_m, cvr_idf1, cvrma;
    Mean vc_bleu, vc_rouge, vc_meteor, vc_cider;
    Mean ic_bleu, ic_rouge, ic_meteor, ic_cider;
    long idsw = 0, fp = 0, fn = 0;
    bool any_tracking = false;

    for (const auto& s : report.sequences) {
        nlohmann::ordered_json row;
        row["id"] = s.id;
        if (s.tracking) {
            row["tracking"] = report_detail::tracking_json(*s.tracking);
            hota.add(s.tracking->hota * 100.0);
            det_a.add(s.tracking->det_a * 100.0);
            ass_a.add(s.tracking->ass_a * 100.0);
            mota.add(s.tracking->mota * 100.0);
            idf1_m.add(s.tracking->idf1 * 100.0);
            idsw += s.tracking->idsw;
            fp += s.tracking->fp;
            fn += s.tracking->fn;
            any_tracking = true;
        }
        if (s.cross_view) {
            row["cross_view"] = report_detail::cross_view_json(*s.cross_view);
            cvr_idf1.add(s.cross_view->cvr_idf1 * 100.0);
            cvrma.add(s.cross_view->cvrma * 100.0);
        }
        if (s.video_caption) {
            row["video_caption"] = report_detail::caption_json(*s.video_caption);
            vc_bleu.add(s.video_caption->bleu4);
            vc_rouge.add(s.video_caption->rouge_l);
            vc_meteor.add(s.video_caption->meteor);
            vc_cider.add(s.video_caption->cider_d);
        }
        if (s.instance_caption) {
            row["instance_caption"] = report_detail::caption_json(*s.instance_caption);
            ic_bleu.add(s.instance_caption->bleu4);
            ic_rouge.add(s.instance_caption->rouge_l);
            ic_meteor.add(s.instance_caption->meteor);
            ic_cider.add(s.instance_caption->cider_d);
        }
        sequences.push_back(std::move(row));
    }

    auto& agg = j["aggregate"] = nlohmann::ordered_json::object();
    auto put = [](nlohmann::ordered_json& obj, const char* key, const report_detail::Mean& m) {
        if (auto v = m.get()) obj[key] = *v;
    };
    if (any_tracking) {
        auto& t = agg["tracking"] = nlohmann::ordered_json::object();
        put(t, "hota", hota);
        put(t, "det_a", det_a);
        put(t, "ass_a", ass_a);
        put(t, "mota", mota);
        put(t, "idf1", idf1_m);
        t["idsw"] = idsw;
        t["fp"] = fp;
        t["fn"] = fn;
    }
    if (cvr_idf1.n > 0) {
        auto& c = agg["cross_view"] = nlohmann::ordered_json::object();
        put(c, "cvr_idf1", cvr_idf1);
        put(c, "cvrma", cvrma);
    }
    if (vc_bleu.n > 0) {
        auto& c = agg["video_caption"] = nlohmann::ordered_json::object();
        put(c, "bleu4", vc_bleu);
        put(c, "rouge_l", vc_rouge);
        put(c, "meteor", vc_meteor);
        put(c, "cider_d", vc_cider);
    }
    if (ic_bleu.n > 0) {
        auto& c = agg["instance_caption"] = nlohmann::ordered_json::object();
        put(c, "bleu4", ic_bleu);
        put(c, "rouge_l", ic_rouge);
        put(c, "meteor", ic_meteor);
        put(c, "cider_d", ic_cider);
    }
    return j;
}

inline void write_report_json(const MetricReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << report_to_json(report).dump(2) << '\n';
}

// one row per sequence; empty cells where a metric does not apply
inline void write_report_csv(const MetricReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "id,hota,det_a,ass_a,mota,idf1,idsw,fp,fn,cvr_idf1,cvrma,"
           "vc_bleu4,vc_rouge_l,vc_meteor,vc_cider_d,"
           "ic_bleu4,ic_rouge_l,ic_meteor,ic_cider_d\n";
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f", v);
        return std::string(buf);
    };
    for (const auto& s : report.sequences) {
        out << s.id;
        if (s.tracking) {
            out << ',' << num(s.tracking->hota * 100.0) << ',' << num(s.tracking->det_a * 100.0)
                << ',' << num(s.tracking->ass_a * 100.0) << ',' << num(s.tracking->mota * 100.0)
                << ',' << num(s.tracking->idf1 * 100.0) << ',' << s.tracking->idsw << ','
                << s.tracking->fp << ',' << s.tracking->fn;
        } else {
            out << ",,,,,,,,";
        }
        if (s.cross_view) {
            out << ',' << num(s.cross_view->cvr_idf1 * 100.0) << ','
                << num(s.cross_view->cvrma * 100.0);
        } else {
            out << ",,";
        }
        for (const auto* caps : {&s.video_caption, &s.instance_caption}) {
            if (*caps) {
                out << ',' << num((*caps)->bleu4) << ',' << num((*caps)->rouge_l) << ','
                    << num((*caps)->meteor) << ',' << num((*caps)->cider_d);
            } else {
                out << ",,,,";
            }
        }
        out << '\n';
    }
}

}  // namespace vltrack
