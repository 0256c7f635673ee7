#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vltrack/porter.hpp"

namespace vltrack {

using TokenList = std::vector<std::string>;

// Lowercase, punctuation to spaces, split on whitespace. ASCII-oriented;
// non-ASCII bytes are treated as word characters.
inline TokenList tokenize_caption(std::string_view text) {
    TokenList out;
    std::string word;
    for (char raw : text) {
        const unsigned char c = static_cast<unsigned char>(raw);
        const bool keep = std::isalnum(c) || c >= 0x80;
        if (keep) {
            word += static_cast<char>(std::tolower(c));
        } else if (!word.empty()) {
            out.push_back(std::move(word));
            word.clear();
        }
    }
    if (!word.empty()) out.push_back(std::move(word));
    return out;
}

namespace caption_detail {

inline constexpr char kSep = '\x1f';

inline std::unordered_map<std::string, int> ngram_counts(const TokenList& tokens, int n) {
    std::unordered_map<std::string, int> counts;
    if (static_cast<int>(tokens.size()) < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key = tokens[i];
        for (int k = 1; k < n; ++k) {
            key += kSep;
            key += tokens[i + k];
        }
        ++counts[key];
    }
    return counts;
}

inline std::size_t lcs_length(const TokenList& a, const TokenList& b) {
    const std::size_t n = a.size(), m = b.size();
    std::vector<std::size_t> prev(m + 1, 0), cur(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

}  // namespace caption_detail

// BLEU-4: geometric mean of clipped n-gram precisions (n = 1..4) with the
// brevity penalty. Zero numerators fall back to an epsilon so one missing
// order does not null the whole score.
inline double bleu4(const TokenList& candidate, const std::vector<TokenList>& references) {
    if (references.empty()) {
        throw std::invalid_argument("bleu4: need at least one reference");
    }
    if (candidate.empty()) return 0.0;
    constexpr double kEps = 1e-9;

    double log_sum = 0.0;
    for (int n = 1; n <= 4; ++n) {
        const auto cand = caption_detail::ngram_counts(candidate, n);
        std::unordered_map<std::string, int> max_ref;
        for (const auto& ref : references) {
            for (const auto& [g, c] : caption_detail::ngram_counts(ref, n)) {
                auto& slot = max_ref[g];
                slot = std::max(slot, c);
            }
        }
        long long total = 0, clipped = 0;
        for (const auto& [g, c] : cand) {
            total += c;
            auto it = max_ref.find(g);
            if (it != max_ref.end()) clipped += std::min(c, it->second);
        }
        const double p = (total > 0 && clipped > 0)
                             ? static_cast<double>(clipped) / static_cast<double>(total)
                             : kEps;
        log_sum += std::log(p);
    }

    // closest reference length; ties favor the shorter
    const std::size_t c = candidate.size();
    std::size_t r = references.front().size();
    for (const auto& ref : references) {
        const auto diff = [&](std::size_t len) {
            return len > c ? len - c : c - len;
        };
        if (diff(ref.size()) < diff(r) || (diff(ref.size()) == diff(r) && ref.size() < r)) {
            r = ref.size();
        }
    }
    const double bp = c >= r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
    return bp * std::exp(log_sum / 4.0);
}

// ROUGE-L: LCS-based F-measure with beta = 1.2, max over references.
inline double rouge_l(const TokenList& candidate, const std::vector<TokenList>& references) {
    if (candidate.empty()) return 0.0;
    constexpr double kBeta = 1.2;
    double best = 0.0;
    for (const auto& ref : references) {
        if (ref.empty()) continue;
        const double lcs = static_cast<double>(caption_detail::lcs_length(candidate, ref));
        if (lcs == 0.0) continue;
        const double p = lcs / static_cast<double>(candidate.size());
        const double r = lcs / static_cast<double>(ref.size());
        const double f = (1.0 + kBeta * kBeta) * p * r / (r + kBeta * kBeta * p);
        best = std::max(best, f);
    }
    return best;
}

// METEOR without synonym resources: unigram alignment on exact matches
// first, Porter stems on the leftovers. Harmonic mean weighted 9:1 towards
// recall, fragmentation penalty 0.5 * (chunks/matches)^3. Max over
// references.
inline double meteor_lite(const TokenList& candidate, const std::vector<TokenList>& references) {
    if (candidate.empty()) return 0.0;

    PorterStemmer stemmer;
    std::vector<std::string> cand_stems;
    cand_stems.reserve(candidate.size());
    for (const auto& t : candidate) cand_stems.push_back(stemmer.stem(t));

    double best = 0.0;
    for (const auto& ref : references) {
        if (ref.empty()) continue;
        std::vector<std::string> ref_stems;
        ref_stems.reserve(ref.size());
        for (const auto& t : ref) ref_stems.push_back(stemmer.stem(t));

        std::vector<int> cand_to_ref(candidate.size(), -1);
        std::vector<char> ref_used(ref.size(), 0);
        const auto align = [&](auto key_cand, auto key_ref) {
            for (std::size_t i = 0; i < candidate.size(); ++i) {
                if (cand_to_ref[i] >= 0) continue;
                for (std::size_t j = 0; j < ref.size(); ++j) {
                    if (ref_used[j]) continue;
                    if (key_cand(i) == key_ref(j)) {
                        cand_to_ref[i] = static_cast<int>(j);
                        ref_used[j] = 1;
                        break;
                    }
                }
            }
        };
        align([&](std::size_t i) -> const std::string& { return candidate[i]; },
              [&](std::size_t j) -> const std::string& { return ref[j]; });
        align([&](std::size_t i) -> const std::string& { return cand_stems[i]; },
              [&](std::size_t j) -> const std::string& { return ref_stems[j]; });

        int m = 0;
        int chunks = 0;
        int prev_i = -2, prev_j = -2;
        for (std::size_t i = 0; i < candidate.size(); ++i) {
            if (cand_to_ref[i] < 0) continue;
            ++m;
            if (static_cast<int>(i) != prev_i + 1 || cand_to_ref[i] != prev_j + 1) ++chunks;
            prev_i = static_cast<int>(i);
            prev_j = cand_to_ref[i];
        }
        if (m == 0) continue;
        const double p = static_cast<double>(m) / static_cast<double>(candidate.size());
        const double r = static_cast<double>(m) / static_cast<double>(ref.size());
        const double f_mean = 10.0 * p * r / (r + 9.0 * p);
        const double frag = static_cast<double>(chunks) / static_cast<double>(m);
        const double score = f_mean * (1.0 - 0.5 * frag * frag * frag);
        best = std::max(best, score);
    }
    return best;
}

// Document frequencies over the evaluation reference corpus; one document
// per image (= per reference set).
struct CorpusIdf {
    std::unordered_map<std::string, int> doc_freq;  // ngram -> number of docs containing it
    int num_docs = 0;
    double log_num_docs = 0.0;
};

inline CorpusIdf build_corpus_idf(const std::vector<std::vector<TokenList>>& corpus) {
    CorpusIdf idf;
    idf.num_docs = static_cast<int>(corpus.size());
    idf.log_num_docs = corpus.empty() ? 0.0 : std::log(static_cast<double>(corpus.size()));
    for (const auto& refs : corpus) {
        std::unordered_map<std::string, char> seen;
        for (const auto& ref : refs) {
            for (int n = 1; n <= 4; ++n) {
                for (const auto& [g, _] : caption_detail::ngram_counts(ref, n)) seen[g] = 1;
            }
        }
        for (const auto& [g, _] : seen) ++idf.doc_freq[g];
    }
    return idf;
}

namespace caption_detail {

struct TfIdfVec {
    std::array<std::unordered_map<std::string, double>, 4> vec;
    std::array<double, 4> norm{};
    std::size_t length = 0;
};

inline TfIdfVec tfidf_vector(const TokenList& tokens, const CorpusIdf& idf) {
    TfIdfVec out;
    out.length = tokens.size();
    for (int n = 1; n <= 4; ++n) {
        double sq = 0.0;
        for (const auto& [g, tf] : ngram_counts(tokens, n)) {
            auto it = idf.doc_freq.find(g);
            const double df = it == idf.doc_freq.end() ? 1.0 : std::max(1.0, static_cast<double>(it->second));
            const double w = static_cast<double>(tf) * (idf.log_num_docs - std::log(df));
            out.vec[n - 1][g] = w;
            sq += w * w;
        }
        out.norm[n - 1] = std::sqrt(sq);
    }
    return out;
}

}  // namespace caption_detail

// CIDEr-D: mean over n = 1..4 of clipped tf-idf cosine similarity with a
// Gaussian length penalty (sigma = 6), averaged over references, times 10.
inline double cider_d(const TokenList& candidate, const std::vector<TokenList>& references,
                      const CorpusIdf& idf) {
    if (idf.num_docs == 0) {
        throw std::invalid_argument("cider_d: empty reference corpus");
    }
    if (references.empty()) {
        throw std::invalid_argument("cider_d: need at least one reference");
    }
    constexpr double kSigma = 6.0;

    const auto cand = caption_detail::tfidf_vector(candidate, idf);
    std::array<double, 4> acc{};
    for (const auto& ref_tokens : references) {
        const auto ref = caption_detail::tfidf_vector(ref_tokens, idf);
        const double delta = static_cast<double>(cand.length) - static_cast<double>(ref.length);
        const double penalty = std::exp(-(delta * delta) / (2.0 * kSigma * kSigma));
        for (int n = 0; n < 4; ++n) {
            double val = 0.0;
            for (const auto& [g, cw] : cand.vec[n]) {
                auto it = ref.vec[n].find(g);
                if (it == ref.vec[n].end()) continue;
                val += std::min(cw, it->second) * it->second;
            }
            if (cand.norm[n] > 0.0 && ref.norm[n] > 0.0) {
                val /= cand.norm[n] * ref.norm[n];
            }
            acc[n] += val * penalty;
        }
    }
    const double mean_n = (acc[0] + acc[1] + acc[2] + acc[3]) / 4.0;
    return mean_n / static_cast<double>(references.size()) * 10.0;
}

struct CaptionScores {
    double bleu4 = 0.0;
    double rouge_l = 0.0;
    double meteor = 0.0;
    double cider_d = 0.0;
};

inline CaptionScores caption_scores(const TokenList& candidate,
                                    const std::vector<TokenList>& references,
                                    const CorpusIdf& idf) {
    CaptionScores s;
    s.bleu4 = bleu4(candidate, references);
    s.rouge_l = rouge_l(candidate, references);
    s.meteor = meteor_lite(candidate, references);
    s.cider_d = cider_d(candidate, references, idf);
    return s;
}

}  // namespace vltrack
