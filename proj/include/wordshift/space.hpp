#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include "wordshift/common.hpp"
#include "wordshift/sgns.hpp"

namespace wordshift {

// Queryable vector space: unit-normalized rows plus corpus frequencies
// and the neighbor-candidate mask. Immutable after build; queries are
// pure reads.
struct EmbeddingSpace {
    Vocabulary vocab;  // corpus frequencies attached
    int dim = 0;
    std::vector<float> unit;         // |V| x dim, rows L2-normalized
    std::vector<uint8_t> candidate;  // freq > neighbor_min_freq
    uint64_t neighbor_min_freq = 100;

    std::span<const float> row(size_t i) const {
        return {unit.data() + i * static_cast<size_t>(dim), static_cast<size_t>(dim)};
    }
    size_t size() const { return vocab.size(); }
    size_t candidate_count() const {
        size_t n = 0;
        for (uint8_t c : candidate) n += c;
        return n;
    }
};

struct NeighborSet {
    std::string target;
    int k = 0;  // as requested; |ordered| = min(k, eligible candidates)
    std::vector<std::pair<std::string, double>> ordered;  // cosine descending
    std::unordered_set<std::string> as_set;
};

// Attaches corpus frequencies to an embedding matrix and normalizes its
// rows. Words with zero vectors are dropped with a warning; words missing
// from `freq` stay in the space but are never neighbor candidates.
inline EmbeddingSpace build_space(const EmbeddingMatrix& em, const FrequencyTable& freq,
                                  uint64_t neighbor_min_freq = 100) {
    std::vector<std::pair<std::string, uint64_t>> entries;
    std::vector<int32_t> source_row;
    entries.reserve(em.vocab.size());
    for (size_t i = 0; i < em.vocab.size(); ++i) {
        double norm2 = 0.0;
        for (float x : em.row(i)) norm2 += static_cast<double>(x) * x;
        if (norm2 == 0.0) {
            warn("word '" + em.vocab.words[i] + "' has a zero vector; excluded from space");
            continue;
        }
        entries.emplace_back(em.vocab.words[i], freq.count(em.vocab.words[i]));
        source_row.push_back(static_cast<int32_t>(i));
    }
    if (entries.empty())
        throw std::runtime_error("all vectors are zero; cannot build a space");

    // vocabulary order is recomputed from the attached frequencies
    std::vector<size_t> perm(entries.size());
    for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::sort(perm.begin(), perm.end(), [&](size_t a, size_t b) {
        if (entries[a].second != entries[b].second)
            return entries[a].second > entries[b].second;
        return entries[a].first < entries[b].first;
    });

    EmbeddingSpace sp;
    sp.dim = em.dim;
    sp.neighbor_min_freq = neighbor_min_freq;
    const size_t n = entries.size();
    const size_t d = static_cast<size_t>(em.dim);
    sp.unit.resize(n * d);
    sp.candidate.resize(n);
    std::vector<std::pair<std::string, uint64_t>> ordered;
    ordered.reserve(n);
    for (size_t out = 0; out < n; ++out) {
        const size_t src = perm[out];
        ordered.push_back(entries[src]);
        auto r = em.row(static_cast<size_t>(source_row[src]));
        double norm2 = 0.0;
        for (float x : r) norm2 += static_cast<double>(x) * x;
        const double inv = 1.0 / std::sqrt(norm2);
        for (size_t j = 0; j < d; ++j)
            sp.unit[out * d + j] = static_cast<float>(r[j] * inv);
        sp.candidate[out] = entries[src].second > neighbor_min_freq ? 1 : 0;
    }
    sp.vocab = build_vocabulary(ordered, {}, 0, 0.0);
    return sp;
}

inline double cosine(const EmbeddingSpace& sp, std::string_view w1, std::string_view w2) {
    const int32_t i = sp.vocab.id_of(w1);
    const int32_t j = sp.vocab.id_of(w2);
    if (i < 0) throw std::invalid_argument("unknown word: " + std::string(w1));
    if (j < 0) throw std::invalid_argument("unknown word: " + std::string(w2));
    auto a = sp.row(static_cast<size_t>(i));
    auto b = sp.row(static_cast<size_t>(j));
    double dot = 0.0;
    for (size_t t = 0; t < a.size(); ++t) dot += static_cast<double>(a[t]) * b[t];
    return dot;
}

namespace detail {

// cosine descending, ties lexicographic by word
struct NeighborOrder {
    const EmbeddingSpace* sp;
    bool operator()(const std::pair<double, int32_t>& a,
                    const std::pair<double, int32_t>& b) const {
        if (a.first != b.first) return a.first > b.first;
        return sp->vocab.words[static_cast<size_t>(a.second)] <
               sp->vocab.words[static_cast<size_t>(b.second)];
    }
};

}  // namespace detail

// Exact top-k cosine neighbors of w among candidate words (full scan plus
// partial selection); identical to the naive argsort oracle, including
// tie order.
inline NeighborSet top_k_neighbors(const EmbeddingSpace& sp, std::string_view w, int k,
                                   bool warn_on_clamp = true) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    const int32_t qid = sp.vocab.id_of(w);
    if (qid < 0) throw std::invalid_argument("unknown word: " + std::string(w));

    const size_t n = sp.size();
    const size_t d = static_cast<size_t>(sp.dim);
    const float* q = sp.unit.data() + static_cast<size_t>(qid) * d;

    std::vector<std::pair<double, int32_t>> scored;
    scored.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        if (!sp.candidate[i] || static_cast<int32_t>(i) == qid) continue;
        const float* r = sp.unit.data() + i * d;
        double dot = 0.0;
        for (size_t j = 0; j < d; ++j) dot += static_cast<double>(q[j]) * r[j];
        scored.emplace_back(dot, static_cast<int32_t>(i));
    }

    const size_t take = std::min<size_t>(static_cast<size_t>(k), scored.size());
    if (take < static_cast<size_t>(k) && warn_on_clamp)
        warn("only " + std::to_string(scored.size()) + " neighbor candidates for '" +
             std::string(w) + "'; k clamped from " + std::to_string(k));

    detail::NeighborOrder order{&sp};
    std::partial_sort(scored.begin(), scored.begin() + static_cast<long>(take),
                      scored.end(), order);

    NeighborSet ns;
    ns.target = std::string(w);
    ns.k = k;
    ns.ordered.reserve(take);
    ns.as_set.reserve(take);
    for (size_t i = 0; i < take; ++i) {
        const std::string& word = sp.vocab.words[static_cast<size_t>(scored[i].second)];
        ns.ordered.emplace_back(word, scored[i].first);
        ns.as_set.insert(word);
    }
    return ns;
}

// Batch queries, optionally partitioned over threads; output order and
// content are independent of the partitioning.
inline std::vector<NeighborSet> batch_neighbors(const EmbeddingSpace& sp,
                                                const std::vector<std::string>& words,
                                                int k, int threads = 1) {
    std::vector<NeighborSet> out(words.size());
    if (threads <= 1 || words.size() < 2) {
        for (size_t i = 0; i < words.size(); ++i)
            out[i] = top_k_neighbors(sp, words[i], k, /*warn_on_clamp=*/i == 0);
        return out;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            size_t i;
            while ((i = next.fetch_add(1)) < words.size())
                out[i] = top_k_neighbors(sp, words[i], k, /*warn_on_clamp=*/i == 0);
        });
    for (auto& th : pool) th.join();
    return out;
}

// Neighbor cache: TSV target<TAB>rank<TAB>neighbor<TAB>cosine.
inline void save_neighbor_sets(const std::vector<NeighborSet>& sets, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write neighbor dump: " + path);
    char buf[32];
    for (const auto& ns : sets) {
        for (size_t r = 0; r < ns.ordered.size(); ++r) {
            std::snprintf(buf, sizeof(buf), "%.8f", ns.ordered[r].second);
            out << ns.target << '\t' << (r + 1) << '\t' << ns.ordered[r].first << '\t'
                << buf << '\n';
        }
    }
}

inline std::vector<NeighborSet> load_neighbor_sets(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read neighbor dump: " + path);
    std::vector<NeighborSet> sets;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        size_t start = 0;
        for (size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == '\t') {
                f.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        }
        if (f.size() != 4)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": malformed neighbor line");
        if (sets.empty() || sets.back().target != f[0]) {
            sets.emplace_back();
            sets.back().target = f[0];
        }
        NeighborSet& ns = sets.back();
        ns.ordered.emplace_back(f[2], std::stod(f[3]));
        ns.as_set.insert(f[2]);
        ns.k = static_cast<int>(ns.ordered.size());
    }
    return sets;
}

}  // namespace wordshift
