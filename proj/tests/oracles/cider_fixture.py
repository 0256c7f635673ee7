#!/usr/bin/env python3
"""Independent tf-idf arithmetic for the CIDEr-D test fixture.

Computes the expected scores for the five candidate/reference pairs used in
the caption-metric tests, straight from the formula: per n in 1..4, cosine
similarity of clipped tf-idf n-gram vectors, a Gaussian length penalty
(sigma = 6), averaged over n and references, times 10. Document frequencies
come from the five-image corpus below. Run it to regenerate the frozen
constants; it shares no code with the C++ implementation.
"""

import math
from collections import Counter

SIGMA = 6.0
NMAX = 4

CORPUS = [
    ["a man walks his dog in the park"],
    ["two children play football on the beach", "kids playing soccer near the sea"],
    ["a red car drives down the street"],
    ["an old woman reads a newspaper"],
    ["the quick brown fox jumps over the lazy dog", "a fox leaping above a sleepy dog"],
]

PAIRS = [
    ("a man walks his dog in the park", 0),
    ("children play football on the beach", 1),
    ("a blue bicycle leans against the wall", 2),
    ("completely unrelated words here", 3),
    ("the quick brown fox jumps over the dog", 4),
]


def tokenize(text):
    out = []
    word = []
    for ch in text.lower():
        if ch.isalnum() and ord(ch) < 128:
            word.append(ch)
        else:
            if word:
                out.append("".join(word))
            word = []
    if word:
        out.append("".join(word))
    return out


def ngrams(tokens):
    counts = [Counter() for _ in range(NMAX)]
    for n in range(1, NMAX + 1):
        for i in range(len(tokens) - n + 1):
            counts[n - 1][tuple(tokens[i : i + n])] += 1
    return counts


def doc_freq(corpus):
    df = Counter()
    for refs in corpus:
        seen = set()
        for ref in refs:
            for counter in ngrams(tokenize(ref)):
                seen.update(counter.keys())
        for g in seen:
            df[g] += 1
    return df


def tfidf(counts, df, log_n):
    vec = [dict() for _ in range(NMAX)]
    norm = [0.0] * NMAX
    for n in range(NMAX):
        for g, tf in counts[n].items():
            w = tf * (log_n - math.log(max(1.0, df[g])))
            vec[n][g] = w
            norm[n] += w * w
    return vec, [math.sqrt(x) for x in norm]


def cider_d(candidate, refs, df, log_n):
    cand_tokens = tokenize(candidate)
    cvec, cnorm = tfidf(ngrams(cand_tokens), df, log_n)
    clen = len(cand_tokens)
    total = [0.0] * NMAX
    for ref in refs:
        ref_tokens = tokenize(ref)
        rvec, rnorm = tfidf(ngrams(ref_tokens), df, log_n)
        delta = float(clen - len(ref_tokens))
        for n in range(NMAX):
            val = 0.0
            for g, cw in cvec[n].items():
                rw = rvec[n].get(g, 0.0)
                val += min(cw, rw) * rw
            if cnorm[n] > 0 and rnorm[n] > 0:
                val /= cnorm[n] * rnorm[n]
            val *= math.exp(-(delta ** 2) / (2.0 * SIGMA ** 2))
            total[n] += val
    score = sum(total) / NMAX
    return score / len(refs) * 10.0


def main():
    df = doc_freq(CORPUS)
    log_n = math.log(len(CORPUS))
    for cand, idx in PAIRS:
        print(f"{cider_d(cand, CORPUS[idx], df, log_n):.12f}  # {cand!r}")


if __name__ == "__main__":
    main()
