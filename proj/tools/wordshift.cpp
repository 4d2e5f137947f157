// wordshift: detect words whose predominant usage differs between two
// corpora by comparing nearest-neighbor sets of independently trained
// embedding spaces, with the alignment-based baseline, a stability
// harness, and gold-ranking evaluation.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wordshift/align.hpp"
#include "wordshift/corpus.hpp"
#include "wordshift/detect.hpp"
#include "wordshift/metrics.hpp"
#include "wordshift/provenance.hpp"
#include "wordshift/report.hpp"
#include "wordshift/sgns.hpp"
#include "wordshift/space.hpp"

namespace ws = wordshift;
using nlohmann::ordered_json;

namespace {

// Removes declared outputs when a stage fails partway.
class OutputGuard {
  public:
    void track(const std::string& path) { paths_.push_back(path); }
    void commit() { committed_ = true; }
    ~OutputGuard() {
        if (committed_) return;
        for (const auto& p : paths_) {
            std::error_code ec;
            std::filesystem::remove(p, ec);
            std::filesystem::remove(p + ".meta.json", ec);
        }
    }

  private:
    std::vector<std::string> paths_;
    bool committed_ = false;
};

std::string env_name(std::string flag) {
    for (char& c : flag) {
        if (c == '-' || c == '.') c = '_';
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return "WORDSHIFT_" + flag;
}

// adds the env fallback so precedence is flag > env > config file > default
template <typename Opt>
Opt* env(Opt* opt) {
    std::string name = opt->get_name(false, true);
    while (!name.empty() && name.front() == '-') name.erase(name.begin());
    return opt->envname(env_name(name));
}

struct NormalizerFlags {
    bool no_lowercase = false;
    std::string number_token = "<num>";
    std::vector<std::string> scripts = {"latin"};
    std::string allowed_punct = "-'.";
    bool no_emoji = false;
    std::vector<std::string> strip = {"url", "mention", "hashtag", "retweet"};

    void attach(CLI::App* app) {
        env(app->add_flag("--no-lowercase", no_lowercase, "Keep original casing"));
        env(app->add_option("--number-token", number_token, "Replacement token for numbers"));
        env(app->add_option("--scripts", scripts, "Allowed scripts (latin, cyrillic, greek, hebrew, arabic)")
                ->delimiter(','));
        env(app->add_option("--allowed-punct", allowed_punct, "Punctuation that keeps a token"));
        env(app->add_flag("--no-emoji", no_emoji, "Do not let emoji keep a token"));
        env(app->add_option("--strip", strip, "Pattern classes to strip (url, mention, hashtag, retweet)")
                ->delimiter(','));
    }

    ws::NormalizerConfig build() const {
        ws::NormalizerConfig cfg;
        cfg.lowercase = !no_lowercase;
        cfg.number_token = number_token;
        cfg.allowed_scripts = scripts;
        cfg.allowed_punct = allowed_punct;
        cfg.keep_emoji = !no_emoji;
        cfg.strip_patterns.clear();
        for (const auto& s : strip) {
            if (s == "url") cfg.strip_patterns.push_back(ws::PatternClass::Url);
            else if (s == "mention") cfg.strip_patterns.push_back(ws::PatternClass::Mention);
            else if (s == "hashtag") cfg.strip_patterns.push_back(ws::PatternClass::Hashtag);
            else if (s == "retweet") cfg.strip_patterns.push_back(ws::PatternClass::RetweetMarker);
            else throw CLI::ValidationError("--strip", "unknown pattern class: " + s);
        }
        cfg.validate();
        return cfg;
    }

    void record(ws::RunConfig& rc) const {
        rc.set("normalizer.lowercase", !no_lowercase);
        rc.set("normalizer.number_token", number_token);
        std::string sc;
        for (const auto& s : scripts) sc += (sc.empty() ? "" : ",") + s;
        rc.set("normalizer.scripts", sc);
        rc.set("normalizer.allowed_punct", allowed_punct);
        rc.set("normalizer.keep_emoji", !no_emoji);
        std::string st;
        for (const auto& s : strip) st += (st.empty() ? "" : ",") + s;
        rc.set("normalizer.strip", st);
    }
};

struct TrainerFlags {
    ws::TrainerConfig cfg;
    bool no_deterministic = false;

    void attach(CLI::App* app) {
        env(app->add_option("--dim", cfg.dim, "Vector dimension"));
        env(app->add_option("--window", cfg.window, "Context window size"));
        env(app->add_option("--train-min-count", cfg.min_count, "Trainer vocabulary minimum count"));
        env(app->add_option("--negatives", cfg.negatives, "Negative samples per pair"));
        env(app->add_option("--epochs", cfg.epochs, "Training epochs"));
        env(app->add_option("--lr", cfg.initial_lr, "Initial learning rate"));
        env(app->add_option("--subsample", cfg.subsample_threshold, "Frequent-word subsampling threshold"));
        env(app->add_option("--seed", cfg.seed, "Random seed"));
        env(app->add_option("--workers", cfg.workers, "Training workers (>1 is nondeterministic)"));
        env(app->add_flag("--no-deterministic", no_deterministic,
                          "Allow racy multi-worker updates"));
    }

    ws::TrainerConfig build() const {
        ws::TrainerConfig c = cfg;
        c.deterministic = !no_deterministic;
        c.validate();
        return c;
    }

    void record(ws::RunConfig& rc) const {
        rc.set("trainer.dim", cfg.dim);
        rc.set("trainer.window", cfg.window);
        rc.set("trainer.min_count", cfg.min_count);
        rc.set("trainer.negatives", cfg.negatives);
        rc.set("trainer.epochs", cfg.epochs);
        rc.set("trainer.initial_lr", static_cast<double>(cfg.initial_lr));
        rc.set("trainer.subsample_threshold", cfg.subsample_threshold);
        rc.set("trainer.seed", cfg.seed);
        rc.set("trainer.deterministic", !no_deterministic);
        rc.set("trainer.workers", cfg.workers);
    }
};

struct DetectorFlags {
    ws::DetectorConfig cfg;
    uint64_t neighbor_min_freq = 100;
    std::string stopword_file;

    void attach(CLI::App* app) {
        env(app->add_option("--k", cfg.k, "Neighbor set size for the intersection score"));
        env(app->add_option("--min-count", cfg.min_count, "Ranking-eligibility minimum count"));
        env(app->add_option("--drop-quantile", cfg.drop_quantile,
                            "Drop this fraction of least frequent words from the ranking"));
        env(app->add_option("--stopword-top-n", cfg.stopword_top_n,
                            "Treat the n most frequent words of each corpus as stopwords"));
        env(app->add_option("--stopwords", stopword_file, "Extra stopword file, one word per line"));
        env(app->add_option("--neighbor-min-freq", neighbor_min_freq,
                            "Neighbor candidates need frequency strictly above this"));
        env(app->add_option("--threads", cfg.threads, "Scoring threads"));
    }

    ws::DetectorConfig build() const {
        ws::DetectorConfig c = cfg;
        if (!stopword_file.empty()) c.extra_stopwords = ws::load_stopword_file(stopword_file);
        c.validate();
        return c;
    }

    void record(ws::RunConfig& rc) const {
        rc.set("detector.k", cfg.k);
        rc.set("detector.min_count", cfg.min_count);
        rc.set("detector.drop_quantile", cfg.drop_quantile);
        rc.set("detector.stopword_top_n", static_cast<uint64_t>(cfg.stopword_top_n));
        rc.set("detector.stopword_file", stopword_file);
        rc.set("detector.neighbor_min_freq", neighbor_min_freq);
    }
};

ws::EmbeddingMatrix load_any_embeddings(const std::string& path, bool binary) {
    return binary ? ws::load_embeddings_binary(path) : ws::load_embeddings(path);
}

struct SpacePairInputs {
    std::string embeddings_a, embeddings_b, freq_a, freq_b;
    bool binary = false;

    void attach(CLI::App* app) {
        env(app->add_option("--embeddings-a", embeddings_a, "Embeddings for corpus A")->required());
        env(app->add_option("--embeddings-b", embeddings_b, "Embeddings for corpus B")->required());
        env(app->add_option("--freq-a", freq_a, "Frequency table for corpus A")->required());
        env(app->add_option("--freq-b", freq_b, "Frequency table for corpus B")->required());
        env(app->add_flag("--binary-embeddings", binary, "Read word2vec binary embeddings"));
    }

    std::pair<ws::EmbeddingSpace, ws::EmbeddingSpace> load(uint64_t neighbor_min_freq) const {
        ws::EmbeddingSpace a = ws::build_space(load_any_embeddings(embeddings_a, binary),
                                               ws::load_frequency_table(freq_a),
                                               neighbor_min_freq);
        ws::EmbeddingSpace b = ws::build_space(load_any_embeddings(embeddings_b, binary),
                                               ws::load_frequency_table(freq_b),
                                               neighbor_min_freq);
        return {std::move(a), std::move(b)};
    }

    std::vector<std::string> inputs() const {
        return {embeddings_a, embeddings_b, freq_a, freq_b};
    }
};

// --- subcommand bodies ------------------------------------------------

struct TokenizeArgs {
    std::string input, freq_out, tokens_out;
    bool dedup_exact = false;
    NormalizerFlags norm;
};

void run_tokenize(const TokenizeArgs& args) {
    const ws::NormalizerConfig cfg = args.norm.build();
    OutputGuard guard;
    guard.track(args.freq_out);
    if (!args.tokens_out.empty()) guard.track(args.tokens_out);

    ws::LineReader reader(args.input);
    ws::FrequencyTable ft;
    std::unordered_set<std::string> seen;  // 128-bit line digests
    std::ofstream tokens_out;
    if (!args.tokens_out.empty()) {
        tokens_out.open(args.tokens_out, std::ios::binary);
        if (!tokens_out) throw std::runtime_error("cannot write tokens: " + args.tokens_out);
    }

    std::string line;
    uint64_t kept_lines = 0, dropped_dups = 0;
    while (reader.next(line)) {
        if (args.dedup_exact) {
            const std::string digest = ws::hex64(ws::fnv1a64(line)) +
                                       ws::hex64(ws::fnv1a64(line, 0x9e3779b97f4a7c15ull));
            if (!seen.insert(digest).second) {
                ++dropped_dups;
                continue;
            }
        }
        const std::vector<std::string> toks = ws::normalize_and_tokenize(line, cfg);
        for (const auto& t : toks) ft.add(t);
        if (tokens_out.is_open() && !toks.empty()) {
            for (size_t i = 0; i < toks.size(); ++i) {
                if (i) tokens_out << ' ';
                tokens_out << toks[i];
            }
            tokens_out << '\n';
        }
        ++kept_lines;
    }
    if (tokens_out.is_open()) tokens_out.close();
    ws::save_frequency_table(ft, args.freq_out);

    ws::RunConfig rc;
    args.norm.record(rc);
    rc.set("tokenize.input", args.input);
    rc.set("tokenize.dedup_exact", args.dedup_exact);
    rc.set("tokenize.kept_lines", kept_lines);
    rc.set("tokenize.dropped_duplicates", dropped_dups);
    rc.set("tokenize.total_tokens", ft.total_tokens);
    std::vector<std::string> outputs = {args.freq_out};
    if (!args.tokens_out.empty()) outputs.push_back(args.tokens_out);
    for (const auto& o : outputs) ws::write_sidecar(o, "tokenize", rc, {args.input}, outputs);
    guard.commit();
    std::fprintf(stderr, "tokenize: %llu tokens, %llu distinct words\n",
                 static_cast<unsigned long long>(ft.total_tokens),
                 static_cast<unsigned long long>(ft.counts.size()));
}

struct TrainArgs {
    std::string corpus, output;
    NormalizerFlags norm;
    TrainerFlags trainer;
};

void run_train(const TrainArgs& args) {
    const ws::NormalizerConfig ncfg = args.norm.build();
    const ws::TrainerConfig tcfg = args.trainer.build();
    OutputGuard guard;
    guard.track(args.output);

    ws::EmbeddingMatrix em = ws::train_embeddings(
        [&]() { return std::make_unique<ws::FileTokenSource>(args.corpus, ncfg); }, tcfg);
    ws::save_embeddings(em, args.output);

    ws::RunConfig rc;
    args.norm.record(rc);
    args.trainer.record(rc);
    rc.set("train.corpus", args.corpus);
    rc.set("train.vocab_size", static_cast<uint64_t>(em.vocab.size()));
    ws::write_sidecar(args.output, "train", rc, {args.corpus}, {args.output});
    guard.commit();
    std::fprintf(stderr, "train: %zu words x %d dims -> %s\n", em.vocab.size(), em.dim,
                 args.output.c_str());
}

struct RankArgs {
    SpacePairInputs pair;
    DetectorFlags det;
    std::string output;
    // aligncos only
    bool mean_center = false;
    bool no_unit_normalize = false;
    std::string dump_map;
};

void run_rank(const RankArgs& args, ws::MethodTag method, uint64_t seed_note) {
    const ws::DetectorConfig dcfg = args.det.build();
    OutputGuard guard;
    guard.track(args.output);
    if (!args.dump_map.empty()) guard.track(args.dump_map);

    auto [a, b] = args.pair.load(args.det.neighbor_min_freq);
    ws::RankedList rl;
    if (method == ws::MethodTag::nn) {
        rl = ws::rank_usage_change(a, b, dcfg);
    } else {
        ws::AlignConfig acfg;
        acfg.mean_center = args.mean_center;
        acfg.unit_normalize = !args.no_unit_normalize;
        rl = ws::aligncos_rank(a, b, dcfg, acfg);
        if (!args.dump_map.empty()) {
            const std::vector<std::string> shared = ws::shared_eligible_words(a, b, dcfg);
            ws::AlignmentProblem prob;
            prob.x = ws::detail::rows_for_words(a, shared);
            prob.y = ws::detail::rows_for_words(b, shared);
            prob.unit_normalize = acfg.unit_normalize;
            prob.mean_center = acfg.mean_center;
            ws::save_orthogonal_map(ws::procrustes_fit(prob).map, args.dump_map);
        }
    }
    ws::save_ranking(rl, args.output);

    ws::RunConfig rc;
    args.det.record(rc);
    rc.set("method", ws::method_name(method));
    rc.set("seed", seed_note);
    if (method == ws::MethodTag::aligncos) {
        rc.set("align.mean_center", args.mean_center);
        rc.set("align.unit_normalize", !args.no_unit_normalize);
    }
    const char* subcommand = method == ws::MethodTag::nn ? "detect" : "aligncos";
    ws::write_sidecar(args.output, subcommand, rc, args.pair.inputs(), {args.output});
    guard.commit();
    std::fprintf(stderr, "%s: ranked %zu words -> %s\n", ws::method_name(method),
                 rl.entries.size(), args.output.c_str());
}

struct StabilityArgs {
    std::string corpus_a, corpus_b, output_prefix;
    NormalizerFlags norm;
    TrainerFlags trainer;
    DetectorFlags det;
    std::vector<int> curve_ks = {10, 20, 50, 100, 200, 500, 1000};
    std::vector<uint64_t> cutoff_sweep = {50, 100, 200, 500};
    std::vector<int> neighbor_sweep = {10, 20, 50, 100, 250, 500, 1000};
};

void run_stability(const StabilityArgs& args) {
    const ws::NormalizerConfig ncfg = args.norm.build();
    const ws::TrainerConfig base = args.trainer.build();
    const ws::DetectorConfig dcfg = args.det.build();

    const std::string json_path = args.output_prefix + "_stability.json";
    const std::string curve_path = args.output_prefix + "_intersection_at_k.tsv";
    OutputGuard guard;
    guard.track(json_path);
    guard.track(curve_path);

    // the protocol: run the embedding twice per corpus, differing only in seed
    auto train_one = [&](const std::string& path, uint64_t seed) {
        ws::TrainerConfig cfg = base;
        cfg.seed = seed;
        return ws::train_embeddings(
            [&path, &ncfg]() { return std::make_unique<ws::FileTokenSource>(path, ncfg); }, cfg);
    };
    const uint64_t s1 = base.seed, s2 = base.seed + 1;
    std::fprintf(stderr, "stability: training 4 embeddings (seeds %llu, %llu)\n",
                 static_cast<unsigned long long>(s1), static_cast<unsigned long long>(s2));
    ws::EmbeddingMatrix a1 = train_one(args.corpus_a, s1);
    ws::EmbeddingMatrix a2 = train_one(args.corpus_a, s2);
    ws::EmbeddingMatrix b1 = train_one(args.corpus_b, s1);
    ws::EmbeddingMatrix b2 = train_one(args.corpus_b, s2);

    ws::FrequencyTable fta, ftb;
    {
        ws::FileTokenSource sa(args.corpus_a, ncfg);
        std::vector<std::string> sent;
        while (sa.next_sentence(sent))
            for (const auto& t : sent) fta.add(t);
        ws::FileTokenSource sb(args.corpus_b, ncfg);
        while (sb.next_sentence(sent))
            for (const auto& t : sent) ftb.add(t);
    }

    auto space_of = [&](const ws::EmbeddingMatrix& em, const ws::FrequencyTable& ft) {
        return ws::build_space(em, ft, args.det.neighbor_min_freq);
    };
    ws::EmbeddingSpace sa1 = space_of(a1, fta), sa2 = space_of(a2, fta);
    ws::EmbeddingSpace sb1 = space_of(b1, ftb), sb2 = space_of(b2, ftb);

    auto rank_pair = [&](const ws::DetectorConfig& cfg) {
        struct Pair {
            ws::RankedList nn1, nn2, ac1, ac2;
        } p;
        p.nn1 = ws::rank_usage_change(sa1, sb1, cfg);
        p.nn2 = ws::rank_usage_change(sa2, sb2, cfg);
        p.ac1 = ws::aligncos_rank(sa1, sb1, cfg);
        p.ac2 = ws::aligncos_rank(sa2, sb2, cfg);
        return p;
    };

    ordered_json out;
    out["seeds"] = {s1, s2};

    auto at_k = [&](const ws::RankedList& r1, const ws::RankedList& r2, int k) -> double {
        return ws::intersection_at_k(r1, r2, k);
    };

    {
        auto p = rank_pair(dcfg);
        const int len = static_cast<int>(
            std::min({p.nn1.entries.size(), p.nn2.entries.size(), p.ac1.entries.size(),
                      p.ac2.entries.size()}));
        ordered_json curve = ordered_json::array();
        std::ofstream tsv(curve_path, std::ios::binary);
        if (!tsv) throw std::runtime_error("cannot write " + curve_path);
        tsv << "k\tnn\taligncos\n";
        for (int k : args.curve_ks) {
            if (k > len) {
                ws::warn("intersection@" + std::to_string(k) + " skipped: rankings have " +
                         std::to_string(len) + " entries");
                continue;
            }
            ordered_json point;
            point["k"] = k;
            point["nn"] = at_k(p.nn1, p.nn2, k);
            point["aligncos"] = at_k(p.ac1, p.ac2, k);
            curve.push_back(point);
            tsv << k << '\t' << ws::format_double(point["nn"].get<double>()) << '\t'
                << ws::format_double(point["aligncos"].get<double>()) << '\n';
        }
        out["intersection_at_k"] = curve;
    }

    {
        ordered_json sweep = ordered_json::array();
        for (uint64_t cutoff : args.cutoff_sweep) {
            ws::DetectorConfig cfg = dcfg;
            cfg.min_count = cutoff;
            try {
                auto p = rank_pair(cfg);
                const int len = static_cast<int>(
                    std::min({p.nn1.entries.size(), p.nn2.entries.size(),
                              p.ac1.entries.size(), p.ac2.entries.size()}));
                const int k = std::min(100, len);
                ordered_json point;
                point["cutoff"] = cutoff;
                point["k"] = k;
                point["nn"] = at_k(p.nn1, p.nn2, k);
                point["aligncos"] = at_k(p.ac1, p.ac2, k);
                sweep.push_back(point);
            } catch (const std::exception& e) {
                ws::warn("cutoff " + std::to_string(cutoff) + " skipped: " + e.what());
            }
        }
        out["frequency_cutoff_sweep"] = sweep;
    }

    {
        ordered_json sweep = ordered_json::array();
        for (int nk : args.neighbor_sweep) {
            ws::DetectorConfig cfg = dcfg;
            cfg.k = nk;
            auto r1 = ws::rank_usage_change(sa1, sb1, cfg);
            auto r2 = ws::rank_usage_change(sa2, sb2, cfg);
            const int len = static_cast<int>(std::min(r1.entries.size(), r2.entries.size()));
            const int k = std::min(100, len);
            ordered_json point;
            point["neighbors"] = nk;
            point["k"] = k;
            point["nn"] = at_k(r1, r2, k);
            sweep.push_back(point);
        }
        out["neighbor_count_sweep"] = sweep;
    }

    {
        std::ofstream jf(json_path, std::ios::binary);
        if (!jf) throw std::runtime_error("cannot write " + json_path);
        jf << out.dump(2) << '\n';
    }

    ws::RunConfig rc;
    args.norm.record(rc);
    args.trainer.record(rc);
    args.det.record(rc);
    rc.set("stability.corpus_a", args.corpus_a);
    rc.set("stability.corpus_b", args.corpus_b);
    ws::write_sidecar(json_path, "stability", rc, {args.corpus_a, args.corpus_b},
                      {json_path, curve_path});
    guard.commit();
    std::fprintf(stderr, "stability: curves -> %s\n", json_path.c_str());
}

struct EvalArgs {
    std::string ranking, gold, output;
};

void run_eval(const EvalArgs& args) {
    OutputGuard guard;
    guard.track(args.output);
    ws::RankedList model = ws::load_ranking(args.ranking);
    ws::GoldRanking gold = ws::load_gold(args.gold);

    ordered_json out = ordered_json::array();
    ordered_json sp;
    sp["metric"] = "spearman";
    sp["value"] = ws::spearman(model, gold);
    out.push_back(sp);
    ordered_json dc;
    dc["metric"] = "dcg";
    dc["value"] = ws::dcg(model, gold);
    out.push_back(dc);

    ordered_json wrapper;
    wrapper["metrics"] = out;
    wrapper["gold_words"] = gold.entries.size();
    {
        std::ofstream jf(args.output, std::ios::binary);
        if (!jf) throw std::runtime_error("cannot write " + args.output);
        jf << wrapper.dump(2) << '\n';
    }

    ws::RunConfig rc;
    rc.set("eval.ranking", args.ranking);
    rc.set("eval.gold", args.gold);
    ws::write_sidecar(args.output, "eval", rc, {args.ranking, args.gold}, {args.output});
    guard.commit();
    std::fprintf(stderr, "eval: spearman=%s dcg=%s -> %s\n",
                 ws::format_double(sp["value"].get<double>()).c_str(),
                 ws::format_double(dc["value"].get<double>()).c_str(), args.output.c_str());
}

struct ReportArgs {
    SpacePairInputs pair;
    DetectorFlags det;
    std::string word, output;
    int top_n = 10;
};

void run_report(const ReportArgs& args) {
    OutputGuard guard;
    guard.track(args.output);
    auto [a, b] = args.pair.load(args.det.neighbor_min_freq);
    ws::NeighborReport rep = ws::neighbor_report(a, b, args.word, args.top_n, args.det.cfg.k);
    ws::save_neighbor_report(rep, args.output);

    ws::RunConfig rc;
    args.det.record(rc);
    rc.set("report.word", args.word);
    rc.set("report.top_n", args.top_n);
    ws::write_sidecar(args.output, "report", rc, args.pair.inputs(), {args.output});
    guard.commit();
    std::fprintf(stderr, "report: %s (intersection %d) -> %s\n", args.word.c_str(),
                 rep.intersection_size_at_k, args.output.c_str());
}

struct VizArgs {
    SpacePairInputs pair;
    DetectorFlags det;
    std::string word, output_prefix;
    int top_n = 50;
    uint64_t seed = 1;
};

void run_viz(const VizArgs& args) {
    auto [a, b] = args.pair.load(args.det.neighbor_min_freq);
    const std::string svg_a = args.output_prefix + "_a.svg";
    const std::string svg_b = args.output_prefix + "_b.svg";
    const std::string tsv_a = args.output_prefix + "_a.tsv";
    const std::string tsv_b = args.output_prefix + "_b.tsv";
    OutputGuard guard;
    for (const auto& p : {svg_a, svg_b, tsv_a, tsv_b}) guard.track(p);

    // one plot per embedding space, same labeled neighbor union
    auto render = [&](const ws::EmbeddingSpace& proj, const std::string& tag,
                      const std::string& svg_path, const std::string& tsv_path) {
        auto labeled = ws::label_neighbor_union(a, b, proj, args.word, args.top_n);
        ws::Projection2D p2 =
            ws::project_neighbors_2d(proj, args.word, labeled, args.seed, tag);
        ws::emit_svg(p2, svg_path);
        ws::save_projection_tsv(p2, tsv_path);
    };
    render(a, "space A: " + args.word, svg_a, tsv_a);
    render(b, "space B: " + args.word, svg_b, tsv_b);

    ws::RunConfig rc;
    args.det.record(rc);
    rc.set("viz.word", args.word);
    rc.set("viz.top_n", args.top_n);
    rc.set("viz.seed", args.seed);
    for (const auto& p : {svg_a, svg_b, tsv_a, tsv_b})
        ws::write_sidecar(p, "viz", rc, args.pair.inputs(), {svg_a, svg_b, tsv_a, tsv_b});
    guard.commit();
    std::fprintf(stderr, "viz: %s -> %s, %s\n", args.word.c_str(), svg_a.c_str(),
                 svg_b.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Detect word usage change between two corpora via nearest-neighbor overlap"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Flat key=value config file; flags override");

    TokenizeArgs tok;
    CLI::App* c_tok = app.add_subcommand("tokenize", "Normalize a corpus and emit frequency tables");
    env(c_tok->add_option("--input", tok.input, "Corpus file, one document per line (.gz ok)")->required());
    env(c_tok->add_option("--freq-out", tok.freq_out, "Frequency table TSV output")->required());
    env(c_tok->add_option("--tokens-out", tok.tokens_out, "Normalized token file output"));
    env(c_tok->add_flag("--dedup-exact", tok.dedup_exact, "Drop exact duplicate lines"));
    tok.norm.attach(c_tok);

    TrainArgs train;
    CLI::App* c_train = app.add_subcommand("train", "Train skip-gram embeddings");
    env(c_train->add_option("--corpus", train.corpus, "Corpus or token file")->required());
    env(c_train->add_option("--output", train.output, "Embedding output (word2vec text)")->required());
    train.norm.attach(c_train);
    train.trainer.attach(c_train);

    RankArgs det;
    CLI::App* c_det = app.add_subcommand("detect", "Rank words by neighbor-set intersection");
    det.pair.attach(c_det);
    det.det.attach(c_det);
    env(c_det->add_option("--output", det.output, "Ranking TSV output")->required());
    uint64_t det_seed = 0;
    env(c_det->add_option("--seed", det_seed, "Seed recorded in provenance"));

    RankArgs ac;
    CLI::App* c_ac = app.add_subcommand("aligncos", "Rank words by aligned cosine distance");
    ac.pair.attach(c_ac);
    ac.det.attach(c_ac);
    env(c_ac->add_option("--output", ac.output, "Ranking TSV output")->required());
    env(c_ac->add_flag("--mean-center", ac.mean_center, "Mean-center rows before fitting"));
    env(c_ac->add_flag("--no-unit-normalize", ac.no_unit_normalize,
                       "Skip row normalization before fitting"));
    env(c_ac->add_option("--dump-map", ac.dump_map, "Write the fitted orthogonal map"));
    uint64_t ac_seed = 0;
    env(c_ac->add_option("--seed", ac_seed, "Seed recorded in provenance"));

    StabilityArgs stab;
    CLI::App* c_stab = app.add_subcommand(
        "stability", "Train two seeds per corpus and measure ranking stability");
    env(c_stab->add_option("--corpus-a", stab.corpus_a, "Corpus A token file")->required());
    env(c_stab->add_option("--corpus-b", stab.corpus_b, "Corpus B token file")->required());
    env(c_stab->add_option("--output-prefix", stab.output_prefix, "Prefix for outputs")->required());
    env(c_stab->add_option("--curve-ks", stab.curve_ks, "k values for intersection@k")->delimiter(','));
    env(c_stab->add_option("--cutoff-sweep", stab.cutoff_sweep, "Frequency cutoffs to sweep")->delimiter(','));
    env(c_stab->add_option("--neighbor-sweep", stab.neighbor_sweep, "Neighbor counts to sweep")->delimiter(','));
    stab.norm.attach(c_stab);
    stab.trainer.attach(c_stab);
    stab.det.attach(c_stab);

    EvalArgs ev;
    CLI::App* c_eval = app.add_subcommand("eval", "Score a ranking against a gold file");
    env(c_eval->add_option("--ranking", ev.ranking, "Ranking TSV")->required());
    env(c_eval->add_option("--gold", ev.gold, "Gold TSV word<TAB>score")->required());
    env(c_eval->add_option("--output", ev.output, "Metrics JSON output")->required());

    ReportArgs rep;
    CLI::App* c_rep = app.add_subcommand("report", "Per-word neighbor diff report");
    rep.pair.attach(c_rep);
    rep.det.attach(c_rep);
    env(c_rep->add_option("--word", rep.word, "Word to report")->required());
    env(c_rep->add_option("--top-n", rep.top_n, "Neighbors to list per space"));
    env(c_rep->add_option("--output", rep.output, "Report JSON output")->required());

    VizArgs viz;
    CLI::App* c_viz = app.add_subcommand("viz", "2-D projection of a word's neighborhoods");
    viz.pair.attach(c_viz);
    viz.det.attach(c_viz);
    env(c_viz->add_option("--word", viz.word, "Word to visualize")->required());
    env(c_viz->add_option("--top-n", viz.top_n, "Neighbors per space to project"));
    env(c_viz->add_option("--viz-seed", viz.seed, "Projection seed"));
    env(c_viz->add_option("--output-prefix", viz.output_prefix, "Prefix for SVG/TSV outputs")->required());

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the message and usage hint
        return 2;
    }

    std::string stage = "startup";
    try {
        if (c_tok->parsed()) {
            stage = "tokenize";
            run_tokenize(tok);
        } else if (c_train->parsed()) {
            stage = "train";
            run_train(train);
        } else if (c_det->parsed()) {
            stage = "detect";
            run_rank(det, ws::MethodTag::nn, det_seed);
        } else if (c_ac->parsed()) {
            stage = "aligncos";
            run_rank(ac, ws::MethodTag::aligncos, ac_seed);
        } else if (c_stab->parsed()) {
            stage = "stability";
            run_stability(stab);
        } else if (c_eval->parsed()) {
            stage = "eval";
            run_eval(ev);
        } else if (c_rep->parsed()) {
            stage = "report";
            run_report(rep);
        } else if (c_viz->parsed()) {
            stage = "viz";
            run_viz(viz);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error [%s]: %s\n", stage.c_str(), e.what());
        return 1;
    }
    return 0;
}
