#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "wordshift/common.hpp"
#include "wordshift/space.hpp"

namespace wordshift {

struct DetectorConfig {
    int k = 1000;
    uint64_t min_count = 200;
    double drop_quantile = 0.2;
    size_t stopword_top_n = 200;
    std::vector<std::string> extra_stopwords;
    int threads = 1;

    void validate() const {
        if (k < 1) throw std::invalid_argument("k must be >= 1");
        if (drop_quantile < 0.0 || drop_quantile >= 1.0)
            throw std::invalid_argument("drop_quantile must be in [0, 1)");
    }
};

enum class MethodTag { nn, aligncos };

inline const char* method_name(MethodTag m) {
    return m == MethodTag::nn ? "nn" : "aligncos";
}

struct RankedEntry {
    std::string word;
    double score;  // higher = more changed
    int rank;      // 1-based, contiguous
};

struct RankedList {
    std::vector<RankedEntry> entries;
    MethodTag method_tag = MethodTag::nn;
    std::map<std::string, std::string> provenance;  // config + seeds

    // 1-based rank of w, or -1 when absent
    int rank_of(std::string_view w) const {
        for (const auto& e : entries)
            if (e.word == w) return e.rank;
        return -1;
    }
};

// Ranking eligibility over a space's own vocabulary universe: not in the
// per-corpus stopword set (top-n by frequency plus the external list),
// count >= min_count, and above the bottom drop_quantile of distinct
// words.
inline std::vector<uint8_t> ranking_eligible_mask(const EmbeddingSpace& sp,
                                                  const DetectorConfig& cfg) {
    std::set<std::string> stop(cfg.extra_stopwords.begin(), cfg.extra_stopwords.end());
    for (size_t i = 0; i < sp.vocab.size() && i < cfg.stopword_top_n; ++i)
        stop.insert(sp.vocab.words[i]);

    std::vector<std::pair<std::string, uint64_t>> entries;
    entries.reserve(sp.vocab.size());
    for (size_t i = 0; i < sp.vocab.size(); ++i)
        entries.emplace_back(sp.vocab.words[i], sp.vocab.freq[i]);
    Vocabulary flagged = build_vocabulary(entries, stop, cfg.min_count, cfg.drop_quantile);

    std::vector<uint8_t> mask(sp.vocab.size());
    for (size_t i = 0; i < sp.vocab.size(); ++i)
        mask[i] = flagged.eligible(i) ? 1 : 0;
    return mask;
}

// Intersection of both vocabularies restricted to words ranking-eligible
// in both; sorted lexicographically.
inline std::vector<std::string> shared_eligible_words(const EmbeddingSpace& a,
                                                      const EmbeddingSpace& b,
                                                      const DetectorConfig& cfg) {
    cfg.validate();
    const std::vector<uint8_t> mask_a = ranking_eligible_mask(a, cfg);
    const std::vector<uint8_t> mask_b = ranking_eligible_mask(b, cfg);
    std::vector<std::string> shared;
    for (size_t i = 0; i < a.vocab.size(); ++i) {
        if (!mask_a[i]) continue;
        const int32_t j = b.vocab.id_of(a.vocab.words[i]);
        if (j >= 0 && mask_b[static_cast<size_t>(j)]) shared.push_back(a.vocab.words[i]);
    }
    if (shared.empty())
        throw std::runtime_error("no shared ranking-eligible words between the two spaces");
    std::sort(shared.begin(), shared.end());
    return shared;
}

inline int neighbor_overlap(const NeighborSet& a, const NeighborSet& b) {
    const auto& small = a.as_set.size() <= b.as_set.size() ? a.as_set : b.as_set;
    const auto& large = a.as_set.size() <= b.as_set.size() ? b.as_set : a.as_set;
    int n = 0;
    for (const auto& w : small) n += large.count(w) ? 1 : 0;
    return n;
}

// score(w) = -|NN_a^k(w) intersect NN_b^k(w)|
inline int nn_score(const EmbeddingSpace& a, const EmbeddingSpace& b, std::string_view w,
                    int k) {
    NeighborSet na = top_k_neighbors(a, w, k);
    NeighborSet nb = top_k_neighbors(b, w, k);
    return -neighbor_overlap(na, nb);
}

namespace detail {

// descending score, then better-attested words first, then lexicographic
inline void sort_and_rank(std::vector<RankedEntry>& entries,
                          const std::vector<uint64_t>& min_freq) {
    std::vector<size_t> perm(entries.size());
    for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::sort(perm.begin(), perm.end(), [&](size_t x, size_t y) {
        if (entries[x].score != entries[y].score) return entries[x].score > entries[y].score;
        if (min_freq[x] != min_freq[y]) return min_freq[x] > min_freq[y];
        return entries[x].word < entries[y].word;
    });
    std::vector<RankedEntry> sorted;
    sorted.reserve(entries.size());
    for (size_t i = 0; i < perm.size(); ++i) {
        sorted.push_back(std::move(entries[perm[i]]));
        sorted.back().rank = static_cast<int>(i) + 1;
    }
    entries = std::move(sorted);
}

inline std::vector<uint64_t> min_cross_freqs(const EmbeddingSpace& a,
                                             const EmbeddingSpace& b,
                                             const std::vector<std::string>& words) {
    std::vector<uint64_t> mf(words.size());
    for (size_t i = 0; i < words.size(); ++i) {
        const uint64_t fa = a.vocab.freq[static_cast<size_t>(a.vocab.id_of(words[i]))];
        const uint64_t fb = b.vocab.freq[static_cast<size_t>(b.vocab.id_of(words[i]))];
        mf[i] = std::min(fa, fb);
    }
    return mf;
}

}  // namespace detail

// The neighbor-set detector: every shared eligible word scored by the
// negative size of its cross-space k-NN intersection.
inline RankedList rank_usage_change(const EmbeddingSpace& a, const EmbeddingSpace& b,
                                    const DetectorConfig& cfg) {
    cfg.validate();
    const std::vector<std::string> shared = shared_eligible_words(a, b, cfg);

    const size_t cand_a = a.candidate_count();
    const size_t cand_b = b.candidate_count();
    if (std::min(cand_a, cand_b) < static_cast<size_t>(cfg.k) + 1)
        warn("fewer neighbor candidates (" + std::to_string(std::min(cand_a, cand_b)) +
             ") than k=" + std::to_string(cfg.k) + "; k is clamped");

    std::vector<NeighborSet> na = batch_neighbors(a, shared, cfg.k, cfg.threads);
    std::vector<NeighborSet> nb = batch_neighbors(b, shared, cfg.k, cfg.threads);

    RankedList rl;
    rl.method_tag = MethodTag::nn;
    rl.entries.resize(shared.size());
    for (size_t i = 0; i < shared.size(); ++i) {
        rl.entries[i].word = shared[i];
        rl.entries[i].score = -neighbor_overlap(na[i], nb[i]);
    }
    detail::sort_and_rank(rl.entries, detail::min_cross_freqs(a, b, shared));

    rl.provenance["method"] = "nn";
    rl.provenance["k"] = std::to_string(cfg.k);
    rl.provenance["min_count"] = std::to_string(cfg.min_count);
    rl.provenance["drop_quantile"] = format_double(cfg.drop_quantile);
    rl.provenance["stopword_top_n"] = std::to_string(cfg.stopword_top_n);
    return rl;
}

// Ranking file: TSV rank<TAB>word<TAB>score.
inline void save_ranking(const RankedList& rl, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write ranking: " + path);
    for (const auto& e : rl.entries)
        out << e.rank << '\t' << e.word << '\t' << format_double(e.score) << '\n';
    if (!out) throw std::runtime_error("write error on ranking: " + path);
}

inline RankedList load_ranking(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read ranking: " + path);
    RankedList rl;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        size_t t1 = line.find('\t');
        size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t2 == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": malformed ranking line");
        RankedEntry e;
        try {
            e.rank = std::stoi(line.substr(0, t1));
            e.word = line.substr(t1 + 1, t2 - t1 - 1);
            e.score = std::stod(line.substr(t2 + 1));
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": malformed ranking line");
        }
        if (e.rank != static_cast<int>(rl.entries.size()) + 1)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": ranks must be contiguous from 1");
        rl.entries.push_back(std::move(e));
    }
    return rl;
}

}  // namespace wordshift
