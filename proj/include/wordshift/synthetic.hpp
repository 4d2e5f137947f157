#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wordshift/rng.hpp"

namespace wordshift {

// Planted-change benchmark generator: a vocabulary partitioned into
// topics, sentences drawn from one topic each, and a handful of planted
// words whose topic assignment differs between the two corpora. Every
// other word keeps its contexts, so the planted words are the only real
// usage changes.
struct SyntheticConfig {
    int topics = 20;
    int words_per_topic = 100;
    uint64_t tokens_per_corpus = 1'000'000;
    int sentence_len = 15;
    int planted = 5;
    double zipf_offset = 10.0;  // within-topic weight(rank) = 1 / (rank + offset)
    double noise = 0.05;        // chance a token is drawn from the global distribution
    uint64_t seed = 42;

    void validate() const {
        if (topics < 2 || words_per_topic < 2 || sentence_len < 2 ||
            tokens_per_corpus < 100)
            throw std::invalid_argument("invalid synthetic configuration");
        if (planted < 0 || planted > topics)
            throw std::invalid_argument("planted words must fit in distinct topics");
        if (noise < 0.0 || noise >= 1.0)
            throw std::invalid_argument("noise must be in [0, 1)");
    }
};

struct SyntheticPair {
    std::vector<std::string> lines_a;
    std::vector<std::string> lines_b;
    std::vector<std::string> planted_words;
};

namespace detail {

// cumulative weight table; sample by binary search
struct SampleTable {
    std::vector<int32_t> ids;
    std::vector<double> cum;

    void build(const std::vector<std::pair<int32_t, double>>& weighted) {
        ids.clear();
        cum.clear();
        double total = 0.0;
        for (const auto& [id, w] : weighted) {
            total += w;
            ids.push_back(id);
            cum.push_back(total);
        }
        for (double& c : cum) c /= total;
    }

    int32_t sample(double u) const {
        const auto it = std::lower_bound(cum.begin(), cum.end(), u);
        const size_t idx = std::min(static_cast<size_t>(it - cum.begin()), ids.size() - 1);
        return ids[idx];
    }
};

inline std::vector<std::string> corpus_lines(const SyntheticConfig& cfg,
                                             const std::vector<int>& topic_of,
                                             const std::vector<std::string>& words,
                                             uint64_t seed) {
    const int vocab = cfg.topics * cfg.words_per_topic;
    auto weight_of = [&](int id) {
        return 1.0 / (static_cast<double>(id % cfg.words_per_topic) + cfg.zipf_offset);
    };

    std::vector<std::vector<std::pair<int32_t, double>>> per_topic(cfg.topics);
    std::vector<std::pair<int32_t, double>> global;
    for (int id = 0; id < vocab; ++id) {
        per_topic[topic_of[id]].emplace_back(id, weight_of(id));
        global.emplace_back(id, weight_of(id));
    }
    std::vector<SampleTable> topic_tables(cfg.topics);
    for (int t = 0; t < cfg.topics; ++t) topic_tables[t].build(per_topic[t]);
    SampleTable global_table;
    global_table.build(global);

    Rng rng(seed);
    std::vector<std::string> lines;
    uint64_t tokens = 0;
    std::string line;
    while (tokens < cfg.tokens_per_corpus) {
        const int topic = static_cast<int>(rng.next_below(cfg.topics));
        line.clear();
        for (int i = 0; i < cfg.sentence_len; ++i) {
            const bool from_global = cfg.noise > 0.0 && rng.next_double() < cfg.noise;
            const int32_t id = from_global ? global_table.sample(rng.next_double())
                                           : topic_tables[topic].sample(rng.next_double());
            if (i) line.push_back(' ');
            line += words[static_cast<size_t>(id)];
        }
        tokens += cfg.sentence_len;
        lines.push_back(line);
    }
    return lines;
}

}  // namespace detail

inline SyntheticPair generate_planted_pair(const SyntheticConfig& cfg) {
    cfg.validate();
    const int vocab = cfg.topics * cfg.words_per_topic;

    std::vector<std::string> words(static_cast<size_t>(vocab));
    char buf[32];
    for (int id = 0; id < vocab; ++id) {
        std::snprintf(buf, sizeof(buf), "w%05d", id);
        words[static_cast<size_t>(id)] = buf;
    }

    // corpus A keeps the natural assignment; in corpus B the planted words
    // move to the topic half a cycle away
    std::vector<int> topic_a(static_cast<size_t>(vocab));
    for (int id = 0; id < vocab; ++id) topic_a[static_cast<size_t>(id)] = id / cfg.words_per_topic;
    std::vector<int> topic_b = topic_a;

    SyntheticPair pair;
    const int mid_rank = cfg.words_per_topic / 4;
    for (int i = 0; i < cfg.planted; ++i) {
        const int id = i * cfg.words_per_topic + mid_rank;
        topic_b[static_cast<size_t>(id)] = (i + cfg.topics / 2) % cfg.topics;
        pair.planted_words.push_back(words[static_cast<size_t>(id)]);
    }

    pair.lines_a = detail::corpus_lines(cfg, topic_a, words, cfg.seed);
    pair.lines_b = detail::corpus_lines(cfg, topic_b, words, cfg.seed ^ 0x5851f42d4c957f2dull);
    return pair;
}

inline void write_lines(const std::vector<std::string>& lines, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write corpus: " + path);
    for (const auto& l : lines) out << l << '\n';
    if (!out) throw std::runtime_error("write error on corpus: " + path);
}

}  // namespace wordshift
