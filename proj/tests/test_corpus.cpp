#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <set>

#include <zlib.h>

#include "wordshift/corpus.hpp"
#include "wordshift/rng.hpp"

using namespace wordshift;

namespace {

std::string join(const std::vector<std::string>& toks) {
    std::string s;
    for (size_t i = 0; i < toks.size(); ++i) {
        if (i) s.push_back(' ');
        s += toks[i];
    }
    return s;
}

std::filesystem::path scratch_dir() {
    std::filesystem::path p(WORDSHIFT_SCRATCH_DIR);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("tokenizer applies the appendix rules", "[corpus]") {
    NormalizerConfig cfg;
    cfg.validate();

    CHECK(normalize_and_tokenize("Check http://t.co/x #cool @you 123", cfg) ==
          std::vector<std::string>{"check", "<num>"});
    CHECK(normalize_and_tokenize("", cfg).empty());
    CHECK(normalize_and_tokenize("RT @a hello hello", cfg) ==
          std::vector<std::string>{"hello", "hello"});
}

TEST_CASE("tokenizer details", "[corpus]") {
    NormalizerConfig cfg;

    SECTION("urls, mentions, hashtags are dropped whole") {
        CHECK(normalize_and_tokenize("www.example.com say #this @me", cfg) ==
              std::vector<std::string>{"say"});
    }
    SECTION("numbers with separators collapse to the number token") {
        CHECK(normalize_and_tokenize("1,000 3.14 -2 10:30 50%", cfg) ==
              std::vector<std::string>{"<num>", "<num>", "<num>", "<num>", "<num>"});
        CHECK(normalize_and_tokenize("r2d2 2pm", cfg) ==
              std::vector<std::string>{"r2d2", "2pm"});
    }
    SECTION("rt survives away from the retweet position") {
        CHECK(normalize_and_tokenize("hello rt world", cfg) ==
              std::vector<std::string>{"hello", "rt", "world"});
        CHECK(normalize_and_tokenize("rt hello", cfg) ==
              std::vector<std::string>{"rt", "hello"});
    }
    SECTION("allowed punctuation keeps a token") {
        CHECK(normalize_and_tokenize("... --- ,,,", cfg) ==
              std::vector<std::string>{"...", "---"});
    }
    SECTION("emoji keep or drop by flag") {
        auto kept = normalize_and_tokenize("\xF0\x9F\x99\x82 ok", cfg);
        CHECK(kept == std::vector<std::string>{"\xF0\x9F\x99\x82", "ok"});
        cfg.keep_emoji = false;
        CHECK(normalize_and_tokenize("\xF0\x9F\x99\x82 ok", cfg) ==
              std::vector<std::string>{"ok"});
    }
    SECTION("script filter") {
        NormalizerConfig heb;
        heb.allowed_scripts = {"hebrew"};
        auto toks = normalize_and_tokenize("hello \xD7\xA9\xD7\x9C\xD7\x95\xD7\x9D", heb);
        CHECK(toks == std::vector<std::string>{"\xD7\xA9\xD7\x9C\xD7\x95\xD7\x9D"});
    }
}

TEST_CASE("tokenizer is idempotent on its own output", "[corpus]") {
    const std::vector<std::string> pieces = {
        "hello", "WORLD",  "#tag",   "@user", "http://x.y/z", "www.q.r", "123",
        "3.14",  "r2d2",   "...",    "---",   "xx-yy",        "RT",      "rt",
        "1,000", "-2",     "don't",  "a.b",   "\xF0\x9F\x99\x82",
        "a\xF0\x9F\x99\x82b", "\xD0\x9F\xD1\x80", "@",  "#",   "50%"};

    NormalizerConfig cfg;
    Rng rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        std::string line;
        const int len = 1 + static_cast<int>(rng.next_below(8));
        for (int i = 0; i < len; ++i) {
            if (i) line.push_back(' ');
            line += pieces[rng.next_below(pieces.size())];
        }
        auto once = normalize_and_tokenize(line, cfg);
        auto twice = normalize_and_tokenize(join(once), cfg);
        INFO("line: " << line);
        CHECK(once == twice);
    }
}

TEST_CASE("normalizer config invariants", "[corpus]") {
    NormalizerConfig cfg;
    cfg.number_token = "";
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.number_token = "123";  // would not survive its own charset filter
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.number_token = "<num>";
    cfg.allowed_punct = "-a";  // 'a' is not punctuation
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("count_frequencies", "[corpus]") {
    auto ft = count_frequencies(std::vector<std::string>{"a", "b", "a"});
    CHECK(ft.count("a") == 2);
    CHECK(ft.count("b") == 1);
    CHECK(ft.total_tokens == 3);

    auto empty = count_frequencies(std::vector<std::string>{});
    CHECK(empty.counts.empty());
    CHECK(empty.total_tokens == 0);

    // oracle: an independent streaming counter
    uint64_t oracle = 0;
    FrequencyTable big;
    for (int i = 0; i < 1'000'000; ++i) {
        big.add("x");
        ++oracle;
    }
    CHECK(big.count("x") == oracle);
    CHECK(big.total_tokens == 1'000'000);
}

TEST_CASE("build_stopwords", "[corpus]") {
    FrequencyTable a, b;
    a.add("the", 100);
    a.add("a", 50);
    a.add("dog", 5);
    b.add("the", 90);
    b.add("of", 40);
    b.add("cat", 2);

    CHECK(build_stopwords(a, b, 0).empty());
    CHECK(build_stopwords(a, b, 2) == std::set<std::string>{"the", "a", "of"});
    CHECK(build_stopwords(a, b, 0, {"lol"}) == std::set<std::string>{"lol"});

    SECTION("size bound |S| <= 2n + |extra|") {
        Rng rng(3);
        for (int trial = 0; trial < 50; ++trial) {
            FrequencyTable x, y;
            const int nx = 1 + static_cast<int>(rng.next_below(20));
            const int ny = 1 + static_cast<int>(rng.next_below(20));
            for (int i = 0; i < nx; ++i)
                x.add("w" + std::to_string(rng.next_below(30)), 1 + rng.next_below(100));
            for (int i = 0; i < ny; ++i)
                y.add("w" + std::to_string(rng.next_below(30)), 1 + rng.next_below(100));
            const size_t n = rng.next_below(10);
            std::vector<std::string> extra = {"e1", "e2"};
            CHECK(build_stopwords(x, y, n, extra).size() <= 2 * n + extra.size());
        }
    }

    SECTION("frequency ties broken lexicographically") {
        FrequencyTable x;
        x.add("zebra", 10);
        x.add("apple", 10);
        x.add("mango", 10);
        FrequencyTable y;
        y.add("only", 1);
        CHECK(build_stopwords(x, y, 2) == std::set<std::string>{"apple", "mango", "only"});
    }
}

TEST_CASE("build_vocabulary flags and ordering", "[corpus]") {
    SECTION("no filters -> everything eligible") {
        FrequencyTable ft;
        ft.add("x", 3);
        ft.add("y", 1);
        ft.add("z", 7);
        Vocabulary v = build_vocabulary(ft, {}, 1, 0.0);
        REQUIRE(v.size() == 3);
        for (size_t i = 0; i < v.size(); ++i) CHECK(v.eligible(i));
        CHECK(v.words == std::vector<std::string>{"z", "x", "y"});
    }

    SECTION("hand-worked filter example") {
        FrequencyTable ft;
        ft.add("a", 500);
        ft.add("b", 300);
        ft.add("c", 100);
        ft.add("d", 50);
        ft.add("e", 10);
        Vocabulary v = build_vocabulary(ft, {}, 200, 0.2);
        std::set<std::string> eligible;
        for (size_t i = 0; i < v.size(); ++i)
            if (v.eligible(i)) eligible.insert(v.words[i]);
        CHECK(eligible == std::set<std::string>{"a", "b"});
        // e is cut by the quantile, c and d by min_count
        CHECK(v.below_quantile[static_cast<size_t>(v.id_of("e"))]);
        CHECK_FALSE(v.below_quantile[static_cast<size_t>(v.id_of("d"))]);
        CHECK(v.below_min_count[static_cast<size_t>(v.id_of("c"))]);
    }

    SECTION("quantile boundary ties are kept") {
        FrequencyTable ft;
        ft.add("a", 100);
        ft.add("b", 100);
        ft.add("c", 5);
        ft.add("d", 5);
        ft.add("e", 5);
        // n_drop = 1, the lowest kept word also has count 5, so nothing is cut
        Vocabulary v = build_vocabulary(ft, {}, 1, 0.2);
        for (size_t i = 0; i < v.size(); ++i) CHECK_FALSE(v.below_quantile[i]);
    }

    SECTION("all words stopped still constructs") {
        FrequencyTable ft;
        ft.add("a", 5);
        ft.add("b", 3);
        Vocabulary v = build_vocabulary(ft, {"a", "b"}, 1, 0.0);
        CHECK(v.size() == 2);
        for (size_t i = 0; i < v.size(); ++i) CHECK_FALSE(v.eligible(i));
    }

    SECTION("empty table is an error") {
        FrequencyTable ft;
        CHECK_THROWS_AS(build_vocabulary(ft, {}, 1, 0.0), std::invalid_argument);
    }

    SECTION("ids are a bijection and order is deterministic") {
        FrequencyTable f1, f2;
        std::vector<std::pair<std::string, uint64_t>> data = {
            {"m", 4}, {"a", 4}, {"q", 9}, {"b", 1}, {"t", 4}};
        for (const auto& [w, c] : data) f1.add(w, c);
        for (auto it = data.rbegin(); it != data.rend(); ++it) f2.add(it->first, it->second);
        Vocabulary v1 = build_vocabulary(f1, {}, 1, 0.0);
        Vocabulary v2 = build_vocabulary(f2, {}, 1, 0.0);
        CHECK(v1.words == v2.words);
        CHECK(v1.words == std::vector<std::string>{"q", "a", "m", "t", "b"});
        std::set<int32_t> seen;
        for (const auto& w : v1.words) seen.insert(v1.id_of(w));
        CHECK(seen.size() == v1.size());
        CHECK(*seen.begin() == 0);
        CHECK(*seen.rbegin() == static_cast<int32_t>(v1.size()) - 1);
    }
}

TEST_CASE("frequency table file round trip", "[corpus]") {
    auto dir = scratch_dir();
    FrequencyTable ft;
    ft.add("zeta", 10);
    ft.add("alpha", 10);
    ft.add("beta", 99);
    const std::string path = (dir / "freq.tsv").string();
    save_frequency_table(ft, path);

    std::ifstream in(path);
    std::string l1, l2, l3;
    std::getline(in, l1);
    std::getline(in, l2);
    std::getline(in, l3);
    CHECK(l1 == "beta\t99");
    CHECK(l2 == "alpha\t10");
    CHECK(l3 == "zeta\t10");

    FrequencyTable back = load_frequency_table(path);
    CHECK(back.counts == ft.counts);
    CHECK(back.total_tokens == ft.total_tokens);
}

TEST_CASE("line reader handles gzip and plain files", "[corpus]") {
    auto dir = scratch_dir();
    const std::string plain = (dir / "corpus.txt").string();
    {
        std::ofstream out(plain, std::ios::binary);
        out << "first line\r\nsecond line\nthird";
    }
    LineReader r(plain);
    std::string line;
    REQUIRE(r.next(line));
    CHECK(line == "first line");
    REQUIRE(r.next(line));
    CHECK(line == "second line");
    REQUIRE(r.next(line));
    CHECK(line == "third");
    CHECK_FALSE(r.next(line));
    r.reset();
    REQUIRE(r.next(line));
    CHECK(line == "first line");

    const std::string gzpath = (dir / "corpus.txt.gz").string();
    {
        gzFile gz = gzopen(gzpath.c_str(), "wb");
        REQUIRE(gz != nullptr);
        const std::string content = "packed one\npacked two\n";
        gzwrite(gz, content.data(), static_cast<unsigned>(content.size()));
        gzclose(gz);
    }
    LineReader gz(gzpath);
    REQUIRE(gz.next(line));
    CHECK(line == "packed one");
    REQUIRE(gz.next(line));
    CHECK(line == "packed two");
    CHECK_FALSE(gz.next(line));
}

TEST_CASE("stopword file loader", "[corpus]") {
    auto dir = scratch_dir();
    const std::string path = (dir / "stop.txt").string();
    {
        std::ofstream out(path, std::ios::binary);
        out << "the\nand\r\n\nof\n";
    }
    CHECK(load_stopword_file(path) == std::vector<std::string>{"the", "and", "of"});
}
