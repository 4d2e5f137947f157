// Synthetic planted-change corpus generator: two topic-structured corpora
// in which a few designated words swap topic contexts, for benchmarking
// the detectors end to end.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "wordshift/synthetic.hpp"

namespace ws = wordshift;

int main(int argc, char** argv) {
    CLI::App app{"Generate a planted usage-change corpus pair"};

    std::string output_dir = ".";
    ws::SyntheticConfig cfg;
    app.add_option("--output-dir", output_dir, "Directory for a.txt, b.txt, manifest.json");
    app.add_option("--topics", cfg.topics, "Number of topics");
    app.add_option("--words-per-topic", cfg.words_per_topic, "Vocabulary words per topic");
    app.add_option("--tokens", cfg.tokens_per_corpus, "Tokens per corpus");
    app.add_option("--sentence-len", cfg.sentence_len, "Tokens per sentence");
    app.add_option("--planted", cfg.planted, "Number of planted usage-change words");
    app.add_option("--zipf-offset", cfg.zipf_offset, "Within-topic frequency skew offset");
    app.add_option("--noise", cfg.noise, "Probability of a token from the global distribution");
    app.add_option("--seed", cfg.seed, "Generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        std::filesystem::create_directories(output_dir);
        ws::SyntheticPair pair = ws::generate_planted_pair(cfg);
        const std::string path_a = (std::filesystem::path(output_dir) / "a.txt").string();
        const std::string path_b = (std::filesystem::path(output_dir) / "b.txt").string();
        ws::write_lines(pair.lines_a, path_a);
        ws::write_lines(pair.lines_b, path_b);

        nlohmann::ordered_json manifest;
        manifest["planted_words"] = pair.planted_words;
        manifest["topics"] = cfg.topics;
        manifest["words_per_topic"] = cfg.words_per_topic;
        manifest["tokens_per_corpus"] = cfg.tokens_per_corpus;
        manifest["sentence_len"] = cfg.sentence_len;
        manifest["zipf_offset"] = cfg.zipf_offset;
        manifest["noise"] = cfg.noise;
        manifest["seed"] = cfg.seed;
        manifest["corpus_a"] = path_a;
        manifest["corpus_b"] = path_b;
        const std::string manifest_path =
            (std::filesystem::path(output_dir) / "manifest.json").string();
        std::ofstream mf(manifest_path, std::ios::binary);
        if (!mf) throw std::runtime_error("cannot write " + manifest_path);
        mf << manifest.dump(2) << '\n';

        std::fprintf(stderr, "synth: %zu + %zu lines -> %s\n", pair.lines_a.size(),
                     pair.lines_b.size(), output_dir.c_str());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error [synth]: %s\n", e.what());
        return 1;
    }
    return 0;
}
