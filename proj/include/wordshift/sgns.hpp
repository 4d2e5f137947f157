#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "wordshift/common.hpp"
#include "wordshift/corpus.hpp"
#include "wordshift/rng.hpp"

namespace wordshift {

struct TrainerConfig {
    int dim = 300;
    int window = 4;
    uint64_t min_count = 20;
    int negatives = 5;
    int epochs = 5;
    float initial_lr = 0.025f;
    double subsample_threshold = 1e-3;
    uint64_t seed = 1;
    bool deterministic = true;
    int workers = 1;  // >1 runs racy shared updates and is nondeterministic

    void validate() const {
        if (dim <= 0 || window <= 0 || negatives < 1 || epochs < 1 ||
            initial_lr <= 0.0f)
            throw std::invalid_argument("invalid trainer configuration");
        if (workers < 1) throw std::invalid_argument("workers must be >= 1");
    }
};

struct EmbeddingMatrix {
    Vocabulary vocab;  // trainer's own, min_count-filtered
    int dim = 0;
    std::vector<float> vectors;          // |V| x dim input vectors, row-major
    std::vector<float> context_vectors;  // empty after load

    std::span<const float> row(size_t i) const {
        return {vectors.data() + i * static_cast<size_t>(dim), static_cast<size_t>(dim)};
    }
    std::span<float> row(size_t i) {
        return {vectors.data() + i * static_cast<size_t>(dim), static_cast<size_t>(dim)};
    }
};

// Restartable sentence stream; the trainer takes one pass for counts and
// one per epoch.
class TokenSource {
  public:
    virtual ~TokenSource() = default;
    virtual void reset() = 0;
    virtual bool next_sentence(std::vector<std::string>& out) = 0;
};

class VectorTokenSource final : public TokenSource {
  public:
    explicit VectorTokenSource(std::vector<std::vector<std::string>> sentences)
        : sentences_(std::move(sentences)) {}

    void reset() override { pos_ = 0; }

    bool next_sentence(std::vector<std::string>& out) override {
        if (pos_ >= sentences_.size()) return false;
        out = sentences_[pos_++];
        return true;
    }

  private:
    std::vector<std::vector<std::string>> sentences_;
    size_t pos_ = 0;
};

// One document per line; lines go through the normalizer, which is a
// no-op on already-normalized text.
class FileTokenSource final : public TokenSource {
  public:
    FileTokenSource(const std::string& path, NormalizerConfig cfg)
        : reader_(path), cfg_(std::move(cfg)) {}

    void reset() override { reader_.reset(); }

    bool next_sentence(std::vector<std::string>& out) override {
        std::string line;
        if (!reader_.next(line)) return false;
        out = normalize_and_tokenize(line, cfg_);
        return true;
    }

  private:
    LineReader reader_;
    NormalizerConfig cfg_;
};

inline double log_sigmoid(double x) {
    if (x >= 0.0) return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct SgnsGradients {
    double loss = 0.0;
    std::vector<double> d_center;
    std::vector<double> d_pos;
    std::vector<std::vector<double>> d_negs;
};

// Loss -[log s(v.c+) + sum log s(-v.c-)] and its exact analytic gradients.
inline SgnsGradients sgns_loss_and_grad(const std::vector<double>& center,
                                        const std::vector<double>& pos,
                                        const std::vector<std::vector<double>>& negs) {
    const size_t d = center.size();
    if (pos.size() != d)
        throw std::invalid_argument("sgns_loss_and_grad: dimension mismatch");
    for (const auto& n : negs)
        if (n.size() != d)
            throw std::invalid_argument("sgns_loss_and_grad: dimension mismatch");

    SgnsGradients g;
    g.d_center.assign(d, 0.0);
    g.d_pos.assign(d, 0.0);
    g.d_negs.assign(negs.size(), std::vector<double>(d, 0.0));

    double dot_pos = 0.0;
    for (size_t j = 0; j < d; ++j) dot_pos += center[j] * pos[j];
    g.loss = -log_sigmoid(dot_pos);
    const double coef_pos = sigmoid(dot_pos) - 1.0;  // d(-log s(x))/dx
    for (size_t j = 0; j < d; ++j) {
        g.d_center[j] += coef_pos * pos[j];
        g.d_pos[j] = coef_pos * center[j];
    }
    for (size_t i = 0; i < negs.size(); ++i) {
        double dot = 0.0;
        for (size_t j = 0; j < d; ++j) dot += center[j] * negs[i][j];
        g.loss -= log_sigmoid(-dot);
        const double coef = sigmoid(dot);
        for (size_t j = 0; j < d; ++j) {
            g.d_center[j] += coef * negs[i][j];
            g.d_negs[i][j] = coef * center[j];
        }
    }
    return g;
}

namespace detail {

constexpr int kExpTableSize = 1000;
constexpr double kMaxExp = 6.0;

struct SigmoidTable {
    float table[kExpTableSize];
    SigmoidTable() {
        for (int i = 0; i < kExpTableSize; ++i) {
            double x = (static_cast<double>(i) / kExpTableSize * 2.0 - 1.0) * kMaxExp;
            table[i] = static_cast<float>(1.0 / (1.0 + std::exp(-x)));
        }
    }
    // callers must guarantee |x| < kMaxExp
    float operator()(float x) const {
        int idx = static_cast<int>((x + kMaxExp) * (kExpTableSize / kMaxExp / 2.0));
        return table[idx];
    }
};

inline const SigmoidTable& sigmoid_table() {
    static const SigmoidTable t;
    return t;
}

// word2vec-style negative-sampling table over unigram^0.75.
inline std::vector<int32_t> build_unigram_table(const std::vector<uint64_t>& counts,
                                                double power = 0.75) {
    const size_t vocab = counts.size();
    const size_t table_size =
        std::min<size_t>(10'000'000, std::max<size_t>(1'000'000, vocab * 1000));
    std::vector<int32_t> table(table_size);
    double total_pow = 0.0;
    for (uint64_t c : counts) total_pow += std::pow(static_cast<double>(c), power);
    size_t i = 0;
    double cum = std::pow(static_cast<double>(counts[0]), power) / total_pow;
    for (size_t j = 0; j < table_size; ++j) {
        table[j] = static_cast<int32_t>(i);
        if (static_cast<double>(j) / table_size > cum && i + 1 < vocab) {
            ++i;
            cum += std::pow(static_cast<double>(counts[i]), power) / total_pow;
        }
    }
    return table;
}

struct TrainShared {
    const Vocabulary* vocab = nullptr;
    std::vector<float>* vectors = nullptr;
    std::vector<float>* context = nullptr;
    const std::vector<int32_t>* unigram = nullptr;
    std::vector<double> keep_prob;  // subsampling keep probability per word
    uint64_t train_tokens = 0;
    TrainerConfig cfg;
    std::atomic<uint64_t> processed{0};
};

inline void train_worker(TrainShared& sh, TokenSource& source, int worker_id) {
    const TrainerConfig& cfg = sh.cfg;
    const int dim = cfg.dim;
    const SigmoidTable& sig = sigmoid_table();
    Rng rng(cfg.seed * 0x9e3779b97f4a7c15ull + 0x1234567u + worker_id);
    float* vec = sh.vectors->data();
    float* ctx = sh.context->data();
    const int32_t* unigram = sh.unigram->data();
    const size_t table_size = sh.unigram->size();
    const double total_budget =
        static_cast<double>(cfg.epochs) * static_cast<double>(sh.train_tokens) + 1.0;

    std::vector<float> center_grad(dim);
    std::vector<std::string> sentence;
    std::vector<int32_t> ids;
    float lr = cfg.initial_lr;
    uint64_t local_processed = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        source.reset();
        uint64_t line_idx = 0;
        while (source.next_sentence(sentence)) {
            const bool mine = (line_idx++ % cfg.workers) == static_cast<uint64_t>(worker_id);
            if (!mine) continue;

            ids.clear();
            for (const auto& w : sentence) {
                int32_t id = sh.vocab->id_of(w);
                if (id < 0) continue;
                ++local_processed;
                if (sh.keep_prob[id] < 1.0 && rng.next_double() > sh.keep_prob[id])
                    continue;
                ids.push_back(id);
            }

            if (local_processed >= 10000) {
                uint64_t done = sh.processed.fetch_add(local_processed) + local_processed;
                local_processed = 0;
                double remain = 1.0 - static_cast<double>(done) / total_budget;
                lr = cfg.initial_lr * static_cast<float>(std::max(remain, 1e-4));
            }

            const int n = static_cast<int>(ids.size());
            for (int pos = 0; pos < n; ++pos) {
                const int32_t w = ids[pos];
                float* vw = vec + static_cast<size_t>(w) * dim;
                const int halfwin = 1 + static_cast<int>(rng.next_below(cfg.window));
                for (int off = -halfwin; off <= halfwin; ++off) {
                    if (off == 0) continue;
                    const int q = pos + off;
                    if (q < 0 || q >= n) continue;
                    const int32_t u = ids[q];

                    std::fill(center_grad.begin(), center_grad.end(), 0.0f);
                    for (int k = 0; k <= cfg.negatives; ++k) {
                        int32_t target;
                        float label;
                        if (k == 0) {
                            target = u;
                            label = 1.0f;
                        } else {
                            target = unigram[rng.next_below(table_size)];
                            if (target == u) continue;
                            label = 0.0f;
                        }
                        float* ct = ctx + static_cast<size_t>(target) * dim;
                        float f = 0.0f;
                        for (int j = 0; j < dim; ++j) f += vw[j] * ct[j];
                        float g;
                        if (f > kMaxExp)
                            g = (label - 1.0f) * lr;
                        else if (f < -kMaxExp)
                            g = label * lr;
                        else
                            g = (label - sig(f)) * lr;
                        for (int j = 0; j < dim; ++j) center_grad[j] += g * ct[j];
                        for (int j = 0; j < dim; ++j) ct[j] += g * vw[j];
                    }
                    for (int j = 0; j < dim; ++j) vw[j] += center_grad[j];
                }
            }
        }
    }
    sh.processed.fetch_add(local_processed);
}

// Builds vocabulary, initial matrices and sampling tables from one
// counting pass over `source`.
inline void prepare_training(TokenSource& source, const TrainerConfig& cfg,
                             EmbeddingMatrix& em, TrainShared& sh,
                             std::vector<int32_t>& unigram) {
    FrequencyTable ft;
    {
        std::vector<std::string> sentence;
        source.reset();
        while (source.next_sentence(sentence))
            for (const auto& t : sentence) ft.add(t);
    }
    std::vector<std::pair<std::string, uint64_t>> kept;
    for (auto& e : ft.sorted())
        if (e.second >= cfg.min_count) kept.push_back(std::move(e));
    if (kept.empty())
        throw std::runtime_error(
            "no word meets the trainer min_count; effective vocabulary is empty");

    em.dim = cfg.dim;
    em.vocab = build_vocabulary(kept, {}, 0, 0.0);
    const size_t v = em.vocab.size();
    const size_t d = static_cast<size_t>(cfg.dim);
    em.vectors.resize(v * d);
    em.context_vectors.assign(v * d, 0.0f);
    Rng init_rng(cfg.seed);
    for (size_t i = 0; i < v * d; ++i)
        em.vectors[i] = (init_rng.next_float() - 0.5f) / cfg.dim;

    sh.vocab = &em.vocab;
    sh.vectors = &em.vectors;
    sh.context = &em.context_vectors;
    sh.cfg = cfg;
    if (cfg.deterministic) sh.cfg.workers = 1;

    uint64_t train_tokens = 0;
    for (uint64_t c : em.vocab.freq) train_tokens += c;
    sh.train_tokens = train_tokens;

    sh.keep_prob.assign(v, 1.0);
    if (cfg.subsample_threshold > 0.0) {
        const double t = cfg.subsample_threshold;
        for (size_t i = 0; i < v; ++i) {
            double f = static_cast<double>(em.vocab.freq[i]) / train_tokens;
            sh.keep_prob[i] = std::min((std::sqrt(f / t) + 1.0) * (t / f), 1.0);
        }
    }

    unigram = build_unigram_table(em.vocab.freq);
    sh.unigram = &unigram;
}

inline void check_finite(const EmbeddingMatrix& em) {
    for (float x : em.vectors)
        if (!std::isfinite(x))
            throw std::runtime_error("training produced non-finite vectors");
}

}  // namespace detail

// Skip-gram negative sampling over a restartable token stream. Always
// sequential through this overload; with a fixed seed the result is
// bit-reproducible.
inline EmbeddingMatrix train_embeddings(TokenSource& source, const TrainerConfig& cfg) {
    cfg.validate();
    EmbeddingMatrix em;
    detail::TrainShared sh;
    std::vector<int32_t> unigram;
    detail::prepare_training(source, cfg, em, sh, unigram);
    sh.cfg.workers = 1;
    detail::train_worker(sh, source, 0);
    detail::check_finite(em);
    return em;
}

using TokenSourceFactory = std::function<std::unique_ptr<TokenSource>()>;

// Multi-worker variant: each worker streams its own shard of lines and
// applies unsynchronized updates to the shared parameters (opt-in,
// nondeterministic). Deterministic mode falls back to one worker.
inline EmbeddingMatrix train_embeddings(const TokenSourceFactory& factory,
                                        const TrainerConfig& cfg) {
    cfg.validate();
    if (cfg.deterministic || cfg.workers == 1) {
        auto source = factory();
        return train_embeddings(*source, cfg);
    }
    EmbeddingMatrix em;
    detail::TrainShared sh;
    std::vector<int32_t> unigram;
    {
        auto counting = factory();
        detail::prepare_training(*counting, cfg, em, sh, unigram);
    }
    std::vector<std::unique_ptr<TokenSource>> sources;
    for (int wid = 0; wid < cfg.workers; ++wid) sources.push_back(factory());
    std::vector<std::thread> threads;
    for (int wid = 0; wid < cfg.workers; ++wid)
        threads.emplace_back([&sh, &sources, wid] { detail::train_worker(sh, *sources[wid], wid); });
    for (auto& th : threads) th.join();
    detail::check_finite(em);
    return em;
}

// word2vec text format: "<vocab> <dim>" header, one "<word> <f1> ... <fdim>"
// line per word. Floats print with 9 significant digits, which round-trips
// single precision exactly.
inline void save_embeddings(const EmbeddingMatrix& em, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write embeddings: " + path);
    out << em.vocab.size() << ' ' << em.dim << '\n';
    for (size_t i = 0; i < em.vocab.size(); ++i) {
        out << em.vocab.words[i];
        for (float x : em.row(i)) out << ' ' << format_float(x);
        out << '\n';
    }
    if (!out) throw std::runtime_error("write error on embeddings: " + path);
}

namespace detail {

inline EmbeddingMatrix make_loaded_matrix(std::vector<std::string> words,
                                          std::vector<float> vectors, int dim) {
    // loaded files carry no frequencies; source row order is preserved
    EmbeddingMatrix em;
    em.dim = dim;
    em.vectors = std::move(vectors);
    const size_t n = words.size();
    em.vocab.words = std::move(words);
    em.vocab.freq.assign(n, 0);
    em.vocab.is_stopword.assign(n, 0);
    em.vocab.below_min_count.assign(n, 0);
    em.vocab.below_quantile.assign(n, 0);
    for (size_t i = 0; i < n; ++i) {
        auto [it, fresh] = em.vocab.ids.emplace(em.vocab.words[i], static_cast<int32_t>(i));
        if (!fresh)
            throw std::runtime_error("duplicate word in embedding file: " + em.vocab.words[i]);
    }
    return em;
}

inline float parse_float_strict(std::string_view s, const std::string& path) {
    float x = 0.0f;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw std::runtime_error("malformed number in embedding file " + path);
    if (!std::isfinite(x))
        throw std::runtime_error("non-finite value in embedding file " + path);
    return x;
}

}  // namespace detail

inline EmbeddingMatrix load_embeddings(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read embeddings: " + path);
    std::string header;
    if (!std::getline(in, header))
        throw std::runtime_error("embedding file is empty: " + path);
    auto head = split_ws(header);
    size_t vocab_size = 0;
    int dim = 0;
    try {
        if (head.size() != 2) throw std::invalid_argument("header");
        vocab_size = std::stoull(std::string(head[0]));
        dim = std::stoi(std::string(head[1]));
    } catch (const std::exception&) {
        throw std::runtime_error("malformed embedding header in " + path);
    }
    if (dim <= 0) throw std::runtime_error("malformed embedding header in " + path);

    std::vector<std::string> words;
    std::vector<float> vectors;
    words.reserve(vocab_size);
    vectors.reserve(vocab_size * static_cast<size_t>(dim));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto parts = split_ws(line);
        if (parts.size() != static_cast<size_t>(dim) + 1)
            throw std::runtime_error("embedding row has wrong dimension in " + path);
        words.emplace_back(parts[0]);
        for (int j = 1; j <= dim; ++j)
            vectors.push_back(detail::parse_float_strict(parts[j], path));
    }
    if (words.size() != vocab_size)
        throw std::runtime_error("embedding file declares " + std::to_string(vocab_size) +
                                 " words but contains " + std::to_string(words.size()));
    return detail::make_loaded_matrix(std::move(words), std::move(vectors), dim);
}

// Read-only support for the word2vec binary format: header line, then
// "<word> " followed by dim little-endian 32-bit floats per word.
inline EmbeddingMatrix load_embeddings_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read embeddings: " + path);
    std::string header;
    if (!std::getline(in, header))
        throw std::runtime_error("embedding file is empty: " + path);
    auto head = split_ws(header);
    size_t vocab_size = 0;
    int dim = 0;
    try {
        if (head.size() != 2) throw std::invalid_argument("header");
        vocab_size = std::stoull(std::string(head[0]));
        dim = std::stoi(std::string(head[1]));
    } catch (const std::exception&) {
        throw std::runtime_error("malformed embedding header in " + path);
    }
    if (dim <= 0) throw std::runtime_error("malformed embedding header in " + path);

    std::vector<std::string> words;
    std::vector<float> vectors(vocab_size * static_cast<size_t>(dim));
    for (size_t i = 0; i < vocab_size; ++i) {
        std::string word;
        int c;
        while ((c = in.get()) != EOF && c != ' ') {
            if (c != '\n') word.push_back(static_cast<char>(c));
        }
        if (c == EOF) throw std::runtime_error("embedding file truncated: " + path);
        in.read(reinterpret_cast<char*>(vectors.data() + i * dim),
                static_cast<std::streamsize>(sizeof(float) * dim));
        if (in.gcount() != static_cast<std::streamsize>(sizeof(float) * dim))
            throw std::runtime_error("embedding file truncated: " + path);
        words.push_back(std::move(word));
    }
    for (float x : vectors)
        if (!std::isfinite(x))
            throw std::runtime_error("non-finite value in embedding file " + path);
    return detail::make_loaded_matrix(std::move(words), std::move(vectors), dim);
}

}  // namespace wordshift
