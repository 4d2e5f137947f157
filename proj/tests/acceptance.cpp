// Acceptance suite: runs every criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exit status is the number of
// failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "wordshift/align.hpp"
#include "wordshift/corpus.hpp"
#include "wordshift/detect.hpp"
#include "wordshift/metrics.hpp"
#include "wordshift/report.hpp"
#include "wordshift/rng.hpp"
#include "wordshift/sgns.hpp"
#include "wordshift/space.hpp"
#include "wordshift/synthetic.hpp"

namespace ws = wordshift;
namespace fs = std::filesystem;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

fs::path scratch() {
    fs::path p(WORDSHIFT_SCRATCH_DIR);
    fs::create_directories(p);
    return p;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------- 1 ---

void criterion_metric_identities(Check& c) {
    auto list = [](const std::vector<std::string>& words) {
        ws::RankedList rl;
        for (size_t i = 0; i < words.size(); ++i)
            rl.entries.push_back({words[i], static_cast<double>(words.size() - i),
                                  static_cast<int>(i) + 1});
        return rl;
    };
    auto gold = [](std::vector<std::pair<std::string, double>> e) {
        ws::GoldRanking g;
        g.entries = std::move(e);
        return g;
    };

    // intersection@k
    auto r1 = list({"a", "b", "c", "d", "e"});
    auto r2 = list({"a", "c", "e", "f", "g"});
    c.require(ws::intersection_at_k(r1, r1, 5) == 1.0, "intersection identity");
    c.require(ws::intersection_at_k(list({"a", "b"}), list({"x", "y"}), 2) == 0.0,
              "intersection disjoint");
    c.require(std::abs(ws::intersection_at_k(r1, r2, 5) - 0.6) < 1e-15,
              "intersection 3/5");
    try {
        ws::intersection_at_k(r1, r2, 6);
        c.require(false, "short list must error");
    } catch (const std::invalid_argument&) {
    }

    // spearman
    auto model = list({"u", "v", "w"});
    c.require(std::abs(ws::spearman(model, gold({{"u", 9}, {"v", 5}, {"w", 1}})) - 1.0) < 1e-12,
              "spearman +1");
    c.require(std::abs(ws::spearman(model, gold({{"u", 1}, {"v", 5}, {"w", 9}})) + 1.0) < 1e-12,
              "spearman -1");
    c.require(std::abs(ws::spearman(model, gold({{"u", 3}, {"v", 1}, {"w", 2}})) - 0.5) < 1e-12,
              "spearman 0.5");

    // dcg
    c.require(std::abs(ws::dcg(list({"w", "x"}), gold({{"w", 3.0}})) - 3.0) < 1e-12,
              "dcg single term");
    auto model4 = list({"v", "x", "u", "y"});
    c.require(std::abs(ws::dcg(model4, gold({{"u", 2.0}, {"v", 1.0}})) - 2.0) < 1e-12,
              "dcg hand example");
    c.require(ws::dcg(list({"a", "b"}), gold({{"a", 0.0}, {"b", 0.0}})) == 0.0, "dcg zeros");

    // gold ingestion
    const std::string g19 = (scratch() / "gold19.tsv").string();
    {
        std::ofstream out(g19);
        for (int i = 0; i < 19; ++i) out << "word" << i << '\t' << i * 0.5 << '\n';
    }
    c.require(ws::load_gold(g19).entries.size() == 19, "19-row gold file");
    const std::string gempty = (scratch() / "gold_empty.tsv").string();
    std::ofstream(gempty).close();
    try {
        ws::load_gold(gempty);
        c.require(false, "empty gold must error");
    } catch (const std::runtime_error&) {
    }
    const std::string gdup = (scratch() / "gold_dup.tsv").string();
    {
        std::ofstream out(gdup);
        out << "x\t1\nx\t2\n";
    }
    try {
        ws::load_gold(gdup);
        c.require(false, "duplicate gold must error");
    } catch (const std::runtime_error& e) {
        c.require(std::string(e.what()).find('x') != std::string::npos,
                  "duplicate error names the word");
    }
}

// ---------------------------------------------------------------- 2 ---

ws::EmbeddingSpace seeded_space(size_t n, int dim, uint64_t seed) {
    ws::Rng rng(seed);
    ws::EmbeddingMatrix em;
    em.dim = dim;
    std::vector<std::pair<std::string, uint64_t>> entries;
    for (size_t i = 0; i < n; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "w%05zu", i);
        entries.emplace_back(buf, 1000);
    }
    em.vocab = ws::build_vocabulary(entries, {}, 0, 0.0);
    em.vectors.resize(n * static_cast<size_t>(dim));
    for (float& x : em.vectors) x = static_cast<float>(rng.next_gaussian());
    ws::FrequencyTable ft;
    for (const auto& [w, cnt] : entries) ft.add(w, cnt);
    return ws::build_space(em, ft, 0);
}

void criterion_knn_exactness(Check& c) {
    ws::EmbeddingSpace sp = seeded_space(2000, 50, 20240601);
    ws::Rng rng(7);
    std::vector<std::string> queries;
    for (int q = 0; q < 200; ++q) queries.push_back(sp.vocab.words[rng.next_below(sp.size())]);

    for (int k : {1, 10, 250}) {
        std::vector<ws::NeighborSet> got = ws::batch_neighbors(sp, queries, k, 2);
        for (size_t qi = 0; qi < queries.size(); ++qi) {
            // naive full-scan argsort oracle
            const int32_t qid = sp.vocab.id_of(queries[qi]);
            std::vector<std::pair<double, std::string>> all;
            for (size_t i = 0; i < sp.size(); ++i) {
                if (static_cast<int32_t>(i) == qid) continue;
                double dot = 0.0;
                auto a = sp.row(static_cast<size_t>(qid));
                auto b = sp.row(i);
                for (size_t j = 0; j < a.size(); ++j)
                    dot += static_cast<double>(a[j]) * b[j];
                all.emplace_back(dot, sp.vocab.words[i]);
            }
            std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
                if (x.first != y.first) return x.first > y.first;
                return x.second < y.second;
            });
            c.require(got[qi].ordered.size() == static_cast<size_t>(k), "k results returned");
            for (int i = 0; i < k && c.ok; ++i) {
                c.require(got[qi].ordered[static_cast<size_t>(i)].first ==
                                  all[static_cast<size_t>(i)].second &&
                              got[qi].ordered[static_cast<size_t>(i)].second ==
                                  all[static_cast<size_t>(i)].first,
                          "batched top-k equals the oracle at k=" + std::to_string(k));
            }
            if (!c.ok) return;
        }
    }
}

// ---------------------------------------------------------------- 3 ---

void criterion_procrustes(Check& c) {
    for (uint64_t trial = 0; trial < 20 && c.ok; ++trial) {
        ws::Rng rng(1000 + trial);
        const size_t n = 500, d = 50;
        ws::Matd x(n, d);
        for (double& v : x.a) v = rng.next_gaussian();
        for (size_t i = 0; i < n; ++i) {  // unit rows; raw-fit problems below
            double n2 = 0.0;
            for (size_t j = 0; j < d; ++j) n2 += x(i, j) * x(i, j);
            for (size_t j = 0; j < d; ++j) x(i, j) /= std::sqrt(n2);
        }
        ws::Matd g(d, d);
        for (double& v : g.a) v = rng.next_gaussian();
        ws::SvdResult gs = ws::svd_small(g);
        ws::Matd r = ws::matmul(gs.u, ws::transpose(gs.v));

        // exact recovery
        ws::AlignmentProblem exact;
        exact.x = x;
        exact.y = ws::matmul(x, r);
        exact.unit_normalize = false;
        ws::ProcrustesFit fit = ws::procrustes_fit(exact);
        double fro = 0.0;
        for (size_t i = 0; i < d * d; ++i) {
            const double diff = fit.map.w.a[i] - r.a[i];
            fro += diff * diff;
        }
        c.require(std::sqrt(fro) <= 1e-6,
                  "rotation recovery trial " + std::to_string(trial));
        c.require(fit.map.orthogonality_error() <= 1e-8, "orthogonality");

        // noisy optimality
        ws::Matd y = ws::matmul(x, r);
        for (double& v : y.a) v += 0.01 * rng.next_gaussian();
        ws::AlignmentProblem noisy;
        noisy.x = x;
        noisy.y = y;
        noisy.unit_normalize = false;
        ws::ProcrustesFit nf = ws::procrustes_fit(noisy);
        ws::Matd xr = ws::matmul(x, r);
        double gen = 0.0;
        for (size_t i = 0; i < xr.a.size(); ++i) {
            const double diff = xr.a[i] - y.a[i];
            gen += diff * diff;
        }
        c.require(nf.residual <= std::sqrt(gen) + 1e-9,
                  "noisy residual optimality trial " + std::to_string(trial));
    }
}

// ---------------------------------------------------------------- 4 ---

void criterion_gradients(Check& c) {
    ws::Rng rng(31337);
    const double h = 1e-5;
    auto loss_of = [](const std::vector<double>& cc, const std::vector<double>& pp,
                      const std::vector<std::vector<double>>& nn) {
        return ws::sgns_loss_and_grad(cc, pp, nn).loss;
    };
    for (int probe = 0; probe < 100 && c.ok; ++probe) {
        const size_t d = 2 + rng.next_below(10);
        auto rand_vec = [&] {
            std::vector<double> v(d);
            for (double& x : v) x = 2.0 * rng.next_double() - 1.0;
            return v;
        };
        std::vector<double> center = rand_vec(), pos = rand_vec();
        std::vector<std::vector<double>> negs;
        const size_t n_negs = rng.next_below(5);
        for (size_t i = 0; i < n_negs; ++i) negs.push_back(rand_vec());

        ws::SgnsGradients g = ws::sgns_loss_and_grad(center, pos, negs);
        double diff2 = 0.0, ref2 = 0.0;
        auto add = [&](double analytic, double fd) {
            diff2 += (analytic - fd) * (analytic - fd);
            ref2 += fd * fd;
        };
        for (size_t j = 0; j < d; ++j) {
            auto cp = center, cm = center;
            cp[j] += h;
            cm[j] -= h;
            add(g.d_center[j], (loss_of(cp, pos, negs) - loss_of(cm, pos, negs)) / (2 * h));
            auto pp = pos, pm = pos;
            pp[j] += h;
            pm[j] -= h;
            add(g.d_pos[j], (loss_of(center, pp, negs) - loss_of(center, pm, negs)) / (2 * h));
            for (size_t i = 0; i < n_negs; ++i) {
                auto np = negs, nm = negs;
                np[i][j] += h;
                nm[i][j] -= h;
                add(g.d_negs[i][j],
                    (loss_of(center, pos, np) - loss_of(center, pos, nm)) / (2 * h));
            }
        }
        c.require(std::sqrt(diff2) <= 1e-4 * (std::sqrt(ref2) + 1e-12),
                  "gradient probe " + std::to_string(probe));
    }
}

// ------------------------------------------------------------- 5, 6 ---

struct TrainedPair {
    ws::EmbeddingSpace a, b;
    std::vector<std::string> planted;
};

ws::EmbeddingMatrix train_lines(const std::vector<std::string>* lines, int dim,
                                uint64_t seed) {
    ws::TrainerConfig cfg;
    cfg.dim = dim;
    cfg.window = 4;
    cfg.seed = seed;
    class LinesSource final : public ws::TokenSource {
      public:
        explicit LinesSource(const std::vector<std::string>* l) : lines_(l) {}
        void reset() override { pos_ = 0; }
        bool next_sentence(std::vector<std::string>& out) override {
            if (pos_ >= lines_->size()) return false;
            out.clear();
            for (auto t : ws::split_ws((*lines_)[pos_++])) out.emplace_back(t);
            return true;
        }

      private:
        const std::vector<std::string>* lines_;
        size_t pos_ = 0;
    };
    LinesSource src(lines);
    return ws::train_embeddings(src, cfg);
}

ws::FrequencyTable freq_of_lines(const std::vector<std::string>& lines) {
    ws::FrequencyTable ft;
    for (const auto& l : lines)
        for (auto t : ws::split_ws(l)) ft.add(t);
    return ft;
}

TrainedPair train_benchmark(const ws::SyntheticPair& pair, int dim, uint64_t seed_a,
                            uint64_t seed_b) {
    auto fut_a = std::async(std::launch::async, train_lines, &pair.lines_a, dim, seed_a);
    ws::EmbeddingMatrix eb = train_lines(&pair.lines_b, dim, seed_b);
    ws::EmbeddingMatrix ea = fut_a.get();
    TrainedPair tp;
    tp.a = ws::build_space(ea, freq_of_lines(pair.lines_a), 100);
    tp.b = ws::build_space(eb, freq_of_lines(pair.lines_b), 100);
    tp.planted = pair.planted_words;
    return tp;
}

void criterion_planted_benchmark(Check& c) {
    ws::SyntheticConfig cfg;  // ~1M tokens, 2000 words, 5 planted
    cfg.seed = 42;
    ws::SyntheticPair pair = ws::generate_planted_pair(cfg);
    TrainedPair tp = train_benchmark(pair, 100, 1, 2);

    ws::DetectorConfig dcfg;
    dcfg.k = 50;
    dcfg.threads = 2;
    ws::RankedList rl = ws::rank_usage_change(tp.a, tp.b, dcfg);
    c.require(rl.entries.size() >= 10, "ranking has at least 10 entries");

    std::vector<std::string> top10;
    for (size_t i = 0; i < 10 && i < rl.entries.size(); ++i)
        top10.push_back(rl.entries[i].word);
    for (const auto& w : pair.planted_words) {
        const bool found = std::find(top10.begin(), top10.end(), w) != top10.end();
        c.require(found, "planted word " + w + " missing from the top 10");
    }
}

void criterion_stability_trend(Check& c) {
    int nn_wins = 0;
    const int trials = 10;
    for (uint64_t gen_seed = 0; gen_seed < trials; ++gen_seed) {
        ws::SyntheticConfig cfg;
        cfg.seed = 9000 + gen_seed;
        ws::SyntheticPair pair = ws::generate_planted_pair(cfg);
        TrainedPair run1 = train_benchmark(pair, 100, 11, 12);
        TrainedPair run2 = train_benchmark(pair, 100, 21, 22);

        ws::DetectorConfig dcfg;
        dcfg.k = 50;
        dcfg.threads = 2;
        ws::RankedList nn1 = ws::rank_usage_change(run1.a, run1.b, dcfg);
        ws::RankedList nn2 = ws::rank_usage_change(run2.a, run2.b, dcfg);
        ws::RankedList ac1 = ws::aligncos_rank(run1.a, run1.b, dcfg);
        ws::RankedList ac2 = ws::aligncos_rank(run2.a, run2.b, dcfg);

        const double nn_stab = ws::intersection_at_k(nn1, nn2, 10);
        const double ac_stab = ws::intersection_at_k(ac1, ac2, 10);
        std::fprintf(stderr, "  stability seed %llu: nn %.2f aligncos %.2f\n",
                     static_cast<unsigned long long>(gen_seed), nn_stab, ac_stab);
        if (nn_stab > ac_stab) ++nn_wins;
    }
    c.detail = "nn more stable in " + std::to_string(nn_wins) + "/10 seeds";
    c.require(nn_wins >= 8, c.detail);
}

// ---------------------------------------------------------------- 7 ---

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + WORDSHIFT_CLI_PATH + "\" " + args +
                            " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void criterion_determinism(Check& c) {
    fs::path dir = scratch() / "determinism";
    fs::create_directories(dir);

    ws::SyntheticConfig cfg;
    cfg.topics = 4;
    cfg.words_per_topic = 25;
    cfg.tokens_per_corpus = 50'000;
    cfg.sentence_len = 12;
    cfg.planted = 1;
    cfg.seed = 77;
    ws::SyntheticPair pair = ws::generate_planted_pair(cfg);
    const std::string raw_a = (dir / "a.txt").string();
    const std::string raw_b = (dir / "b.txt").string();
    ws::write_lines(pair.lines_a, raw_a);
    ws::write_lines(pair.lines_b, raw_b);

    auto stage = [&](const std::string& args, const std::string& what) {
        const int rc = run_cli(args);
        c.require(rc == 0, what + " exited with " + std::to_string(rc));
        return rc == 0;
    };

    const std::string fa = (dir / "fa.tsv").string(), fb = (dir / "fb.tsv").string();
    const std::string ta = (dir / "ta.txt").string(), tb = (dir / "tb.txt").string();
    if (!stage("tokenize --input " + raw_a + " --freq-out " + fa + " --tokens-out " + ta,
               "tokenize a") ||
        !stage("tokenize --input " + raw_b + " --freq-out " + fb + " --tokens-out " + tb,
               "tokenize b"))
        return;

    const std::string ea = (dir / "ea.txt").string(), eb = (dir / "eb.txt").string();
    const std::string train_flags =
        " --dim 32 --window 4 --train-min-count 5 --epochs 2 --subsample 0";
    if (!stage("train --corpus " + ta + " --output " + ea + train_flags + " --seed 1",
               "train a") ||
        !stage("train --corpus " + tb + " --output " + eb + train_flags + " --seed 2",
               "train b"))
        return;

    const std::string pair_flags = " --embeddings-a " + ea + " --embeddings-b " + eb +
                                   " --freq-a " + fa + " --freq-b " + fb +
                                   " --k 10 --min-count 200 --stopword-top-n 10";
    const std::string r1 = (dir / "ranking.tsv").string();
    if (!stage("detect" + pair_flags + " --output " + r1, "detect run 1")) return;
    const std::string first_tsv = slurp(r1);
    const std::string first_sidecar = slurp(r1 + ".meta.json");
    if (!stage("detect" + pair_flags + " --output " + r1, "detect run 2")) return;

    c.require(!first_tsv.empty(), "ranking file is nonempty");
    c.require(slurp(r1) == first_tsv, "ranking files are byte-identical");
    c.require(slurp(r1 + ".meta.json") == first_sidecar,
              "provenance sidecars are byte-identical");
}

// ---------------------------------------------------------------- 8 ---

void criterion_eval_fixtures(Check& c) {
    // Table-3-style correlations need external German corpora, which are out
    // of reach here; the harness instead must reproduce hand-computed metrics
    // on fixture files exactly.
    fs::path dir = scratch();
    const std::string ranking = (dir / "fixture_rank.tsv").string();
    {
        std::ofstream out(ranking);
        out << "1\tu\t0\n2\tv\t-3\n3\tw\t-5\n4\tz\t-9\n";
    }
    const std::string gold = (dir / "fixture_gold.tsv").string();
    {
        std::ofstream out(gold);
        out << "u\t3\nv\t1\nw\t2\n";
    }
    ws::RankedList model = ws::load_ranking(ranking);
    ws::GoldRanking g = ws::load_gold(gold);
    c.require(std::abs(ws::spearman(model, g) - 0.5) < 1e-15, "fixture spearman 0.5 exact");
    const double want_dcg = 3.0 + 1.0 / std::log2(3.0) + 2.0 / std::log2(4.0);
    c.require(std::abs(ws::dcg(model, g) - want_dcg) < 1e-15, "fixture dcg exact");

    // negative gold scores (the published DCG values are negative) pass through
    ws::GoldRanking neg;
    neg.entries = {{"u", -4.54}, {"v", -4.5}};
    c.require(ws::dcg(model, neg) < 0.0, "negative gold scores supported");
}

}  // namespace

int main() {
    struct Criterion {
        std::string name;
        double budget_seconds;
        std::function<void(Check&)> fn;
    };
    const std::vector<Criterion> criteria = {
        {"1 metric identities", 1.0, criterion_metric_identities},
        {"2 k-NN exactness vs naive oracle", 10.0, criterion_knn_exactness},
        {"3 Procrustes rotation recovery and optimality", 30.0, criterion_procrustes},
        {"4 SGNS gradient check", 5.0, criterion_gradients},
        {"5 planted-change benchmark", 300.0, criterion_planted_benchmark},
        {"6 stability trend (NN vs AlignCos)", 3600.0, criterion_stability_trend},
        {"7 deterministic detect is byte-identical", 0.0, criterion_determinism},
        {"8 eval harness on fixture rankings", 0.0, criterion_eval_fixtures},
    };

    int failures = 0;
    for (const auto& crit : criteria) {
        Check c;
        const auto start = std::chrono::steady_clock::now();
        try {
            crit.fn(c);
        } catch (const std::exception& e) {
            c.ok = false;
            c.detail = std::string("exception: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.ok && crit.budget_seconds > 0.0 && elapsed > crit.budget_seconds) {
            c.ok = false;
            c.detail = "runtime " + std::to_string(elapsed) + "s exceeds budget " +
                       std::to_string(crit.budget_seconds) + "s";
        }
        if (c.ok) {
            std::printf("PASS criterion %s (%.1fs)%s\n", crit.name.c_str(), elapsed,
                        c.detail.empty() ? "" : (" [" + c.detail + "]").c_str());
        } else {
            std::printf("FAIL criterion %s (%.1fs): %s\n", crit.name.c_str(), elapsed,
                        c.detail.c_str());
            ++failures;
        }
        std::fflush(stdout);
    }
    return failures;
}
