#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "wordshift/common.hpp"
#include "wordshift/detect.hpp"

namespace wordshift {

struct GoldRanking {
    std::vector<std::pair<std::string, double>> entries;  // word, gold score
    std::string source_tag;
};

// Fraction of shared words between the top-k of two ranked lists.
inline double intersection_at_k(const RankedList& r1, const RankedList& r2, int k) {
    if (k < 1) throw std::invalid_argument("intersection_at_k: k must be >= 1");
    if (r1.entries.size() < static_cast<size_t>(k) ||
        r2.entries.size() < static_cast<size_t>(k))
        throw std::invalid_argument("intersection_at_k: a ranking has fewer than k entries");
    std::unordered_set<std::string> top1;
    top1.reserve(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) top1.insert(r1.entries[static_cast<size_t>(i)].word);
    int shared = 0;
    for (int i = 0; i < k; ++i)
        shared += top1.count(r2.entries[static_cast<size_t>(i)].word) ? 1 : 0;
    return static_cast<double>(shared) / k;
}

namespace detail {

// average-rank transform, ranking values descending (rank 1 = largest)
inline std::vector<double> fractional_ranks_desc(const std::vector<double>& values) {
    const size_t n = values.size();
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return values[a] > values[b]; });
    std::vector<double> ranks(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
        i = j + 1;
    }
    return ranks;
}

// Model rank of each gold word. Words sharing a score take the average
// rank of their score group; gold words absent from the ranking get
// |ranking|+1 with a warning.
inline std::vector<double> model_ranks_for_gold(const RankedList& model,
                                                const GoldRanking& gold) {
    std::unordered_map<std::string, size_t> pos;
    pos.reserve(model.entries.size());
    for (size_t i = 0; i < model.entries.size(); ++i) pos.emplace(model.entries[i].word, i);

    // average rank per score group, computed over the full ranking
    std::vector<double> eff(model.entries.size());
    size_t i = 0;
    while (i < model.entries.size()) {
        size_t j = i;
        while (j + 1 < model.entries.size() &&
               model.entries[j + 1].score == model.entries[i].score)
            ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (size_t t = i; t <= j; ++t) eff[t] = avg;
        i = j + 1;
    }

    std::vector<double> ranks;
    ranks.reserve(gold.entries.size());
    for (const auto& [w, s] : gold.entries) {
        auto it = pos.find(w);
        if (it == pos.end()) {
            warn("gold word '" + w + "' is absent from the model ranking; assigned rank " +
                 std::to_string(model.entries.size() + 1));
            ranks.push_back(static_cast<double>(model.entries.size() + 1));
        } else {
            ranks.push_back(eff[it->second]);
        }
    }
    return ranks;
}

}  // namespace detail

// Tie-corrected Spearman correlation between the model's ranking of the
// gold words and the gold scores.
inline double spearman(const RankedList& model, const GoldRanking& gold) {
    if (gold.entries.size() < 2)
        throw std::invalid_argument("spearman needs at least 2 gold words");

    std::vector<double> model_rank = detail::model_ranks_for_gold(model, gold);
    // better model rank (smaller) should align with larger gold score, so
    // rank the negated positions descending
    std::vector<double> neg_rank(model_rank.size());
    for (size_t i = 0; i < model_rank.size(); ++i) neg_rank[i] = -model_rank[i];
    std::vector<double> gold_scores;
    gold_scores.reserve(gold.entries.size());
    for (const auto& [w, s] : gold.entries) gold_scores.push_back(s);

    const std::vector<double> u = detail::fractional_ranks_desc(neg_rank);
    const std::vector<double> v = detail::fractional_ranks_desc(gold_scores);

    const size_t n = u.size();
    double mu = 0.0, mv = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mu += u[i];
        mv += v[i];
    }
    mu /= static_cast<double>(n);
    mv /= static_cast<double>(n);
    double cov = 0.0, var_u = 0.0, var_v = 0.0;
    for (size_t i = 0; i < n; ++i) {
        cov += (u[i] - mu) * (v[i] - mv);
        var_u += (u[i] - mu) * (u[i] - mu);
        var_v += (v[i] - mv) * (v[i] - mv);
    }
    if (var_u == 0.0 || var_v == 0.0)
        throw std::runtime_error("spearman is undefined: a rank vector is constant");
    return cov / std::sqrt(var_u * var_v);
}

// DCG(M) = sum_w gold(w) / log2(rank_M(w) + 1), ranks 1-based over the
// model's full ranking. Negative gold scores pass through unclipped.
inline double dcg(const RankedList& model, const GoldRanking& gold) {
    if (gold.entries.empty()) throw std::invalid_argument("dcg needs a nonempty gold set");
    std::unordered_map<std::string, int> pos;
    pos.reserve(model.entries.size());
    for (const auto& e : model.entries) pos.emplace(e.word, e.rank);
    double total = 0.0;
    for (const auto& [w, s] : gold.entries) {
        auto it = pos.find(w);
        int rank;
        if (it == pos.end()) {
            warn("gold word '" + w + "' is absent from the model ranking; assigned rank " +
                 std::to_string(model.entries.size() + 1));
            rank = static_cast<int>(model.entries.size()) + 1;
        } else {
            rank = it->second;
        }
        total += s / std::log2(static_cast<double>(rank) + 1.0);
    }
    return total;
}

// Gold file: TSV word<TAB>score.
inline GoldRanking load_gold(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read gold file: " + path);
    GoldRanking gold;
    gold.source_tag = path;
    std::unordered_set<std::string> seen;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty()) continue;
        const size_t tab = line.find('\t');
        if (tab == std::string::npos || tab == 0)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": malformed gold line");
        std::string word = line.substr(0, tab);
        double score;
        try {
            size_t used = 0;
            score = std::stod(line.substr(tab + 1), &used);
            std::string rest = line.substr(tab + 1 + used);
            if (rest.find_first_not_of(" \t") != std::string::npos)
                throw std::invalid_argument("trailing junk");
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": non-numeric gold score");
        }
        if (!std::isfinite(score))
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": non-finite gold score");
        if (!seen.insert(word).second)
            throw std::runtime_error(path + ": duplicate gold word '" + word + "'");
        gold.entries.emplace_back(std::move(word), score);
    }
    if (gold.entries.empty()) throw std::runtime_error("gold file is empty: " + path);
    return gold;
}

}  // namespace wordshift
