#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <zlib.h>

#include "wordshift/common.hpp"
#include "wordshift/text.hpp"

namespace wordshift {

enum class PatternClass : uint8_t { Url, Mention, Hashtag, RetweetMarker };

struct NormalizerConfig {
    bool lowercase = true;
    std::vector<PatternClass> strip_patterns = {
        PatternClass::Url, PatternClass::Mention, PatternClass::Hashtag,
        PatternClass::RetweetMarker};
    std::string number_token = "<num>";
    std::vector<std::string> allowed_scripts = {"latin"};
    std::string allowed_punct = "-'.";  // UTF-8; each code point is one allowed mark
    bool keep_emoji = true;

    void validate() const;
};

namespace detail {

inline bool has_pattern(const NormalizerConfig& cfg, PatternClass p) {
    return std::find(cfg.strip_patterns.begin(), cfg.strip_patterns.end(), p) !=
           cfg.strip_patterns.end();
}

inline bool is_url(std::string_view t) {
    return t.starts_with("http://") || t.starts_with("https://") ||
           t.starts_with("www.");
}

inline bool is_mention(std::string_view t) { return t.size() > 1 && t[0] == '@'; }

inline bool is_hashtag(std::string_view t) { return t.size() > 1 && t[0] == '#'; }

// A token reading as a number: digits plus numeric punctuation, at least
// one digit.
inline bool is_number(std::string_view t) {
    bool digit = false;
    for (char c : t) {
        if (c >= '0' && c <= '9') {
            digit = true;
        } else if (c != '.' && c != ',' && c != ':' && c != '%' && c != '+' &&
                   c != '-' && c != '/') {
            return false;
        }
    }
    return digit;
}

inline bool passes_charset_filter(std::string_view t, const std::vector<Script>& scripts,
                                  const std::vector<uint32_t>& punct, bool keep_emoji) {
    size_t i = 0;
    while (i < t.size()) {
        uint32_t cp = utf8_next(t, i);
        for (Script s : scripts)
            if (in_script(cp, s)) return true;
        for (uint32_t p : punct)
            if (cp == p) return true;
        if (keep_emoji && is_emoji(cp)) return true;
    }
    return false;
}

}  // namespace detail

inline void NormalizerConfig::validate() const {
    if (number_token.empty())
        throw std::invalid_argument("number_token must be nonempty");
    std::vector<Script> scripts;
    for (const auto& name : allowed_scripts) scripts.push_back(script_from_name(name));
    std::vector<uint32_t> punct = utf8_decode(allowed_punct);
    for (uint32_t cp : punct)
        if (!is_unicode_punct(cp))
            throw std::invalid_argument("allowed_punct contains a non-punctuation code point");
    if (!detail::passes_charset_filter(number_token, scripts, punct, keep_emoji))
        throw std::invalid_argument("number_token would not survive its own charset filter");
}

// Appendix-style tweet normalization: lowercase, strip urls/mentions/
// hashtags/retweet markers, replace numbers with number_token, then drop
// tokens that contain no allowed-script character, allowed punctuation
// mark, or emoji. Idempotent on its own space-joined output.
inline std::vector<std::string> normalize_and_tokenize(std::string_view line,
                                                       const NormalizerConfig& cfg) {
    std::string lowered;
    if (cfg.lowercase) {
        lowered = lowercase_utf8(line);
        line = lowered;
    }
    std::vector<std::string_view> raw = split_ws(line);

    std::vector<Script> scripts;
    for (const auto& name : cfg.allowed_scripts) scripts.push_back(script_from_name(name));
    const std::vector<uint32_t> punct = utf8_decode(cfg.allowed_punct);

    const bool strip_url = detail::has_pattern(cfg, PatternClass::Url);
    const bool strip_mention = detail::has_pattern(cfg, PatternClass::Mention);
    const bool strip_hashtag = detail::has_pattern(cfg, PatternClass::Hashtag);
    const bool strip_rt = detail::has_pattern(cfg, PatternClass::RetweetMarker);

    std::vector<std::string> out;
    out.reserve(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) {
        std::string_view t = raw[i];
        if (strip_url && detail::is_url(t)) continue;
        if (strip_mention && detail::is_mention(t)) continue;
        if (strip_hashtag && detail::is_hashtag(t)) continue;
        // The classic retweet prefix is "rt @user ...": drop the marker only
        // in that position so a plain "rt" token elsewhere survives (and so
        // the output re-tokenizes to itself).
        if (strip_rt && i == 0 && t == "rt" && raw.size() > 1 &&
            detail::is_mention(raw[1]))
            continue;
        if (detail::is_number(t)) {
            out.push_back(cfg.number_token);
            continue;
        }
        if (detail::passes_charset_filter(t, scripts, punct, cfg.keep_emoji))
            out.emplace_back(t);
    }
    return out;
}

struct FrequencyTable {
    std::unordered_map<std::string, uint64_t> counts;
    uint64_t total_tokens = 0;

    void add(std::string_view word, uint64_t n = 1) {
        if (n == 0) return;
        counts[std::string(word)] += n;
        total_tokens += n;
    }

    void merge(const FrequencyTable& other) {
        for (const auto& [w, c] : other.counts) counts[w] += c;
        total_tokens += other.total_tokens;
    }

    uint64_t count(std::string_view word) const {
        auto it = counts.find(std::string(word));
        return it == counts.end() ? 0 : it->second;
    }

    bool empty() const { return counts.empty(); }

    // entries sorted by count descending, ties lexicographic
    std::vector<std::pair<std::string, uint64_t>> sorted() const {
        std::vector<std::pair<std::string, uint64_t>> v(counts.begin(), counts.end());
        std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        return v;
    }
};

template <typename TokenRange>
FrequencyTable count_frequencies(const TokenRange& tokens) {
    FrequencyTable ft;
    for (const auto& t : tokens) ft.add(t);
    return ft;
}

inline void save_frequency_table(const FrequencyTable& ft, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write frequency table: " + path);
    for (const auto& [w, c] : ft.sorted()) out << w << '\t' << c << '\n';
}

inline FrequencyTable load_frequency_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read frequency table: " + path);
    FrequencyTable ft;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        size_t tab = line.find('\t');
        if (tab == std::string::npos || tab == 0)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": malformed frequency line");
        uint64_t c = 0;
        try {
            c = std::stoull(line.substr(tab + 1));
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": malformed count");
        }
        if (c == 0) continue;  // zero-count entries are never stored
        std::string w = line.substr(0, tab);
        if (ft.counts.count(w))
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": duplicate word '" + w + "'");
        ft.counts.emplace(std::move(w), c);
        ft.total_tokens += c;
    }
    return ft;
}

// Union of the n most frequent words of each corpus plus an external list.
inline std::set<std::string> build_stopwords(const FrequencyTable& ft_a,
                                             const FrequencyTable& ft_b, size_t n,
                                             const std::vector<std::string>& extra = {}) {
    std::set<std::string> stop;
    for (const FrequencyTable* ft : {&ft_a, &ft_b}) {
        auto entries = ft->sorted();
        for (size_t i = 0; i < entries.size() && i < n; ++i)
            stop.insert(entries[i].first);
    }
    stop.insert(extra.begin(), extra.end());
    return stop;
}

inline std::vector<std::string> load_stopword_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read stopword file: " + path);
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (!line.empty()) words.push_back(line);
    }
    return words;
}

struct Vocabulary {
    std::vector<std::string> words;  // descending frequency, ties lexicographic
    std::unordered_map<std::string, int32_t> ids;
    std::vector<uint64_t> freq;
    std::vector<uint8_t> is_stopword;
    std::vector<uint8_t> below_min_count;
    std::vector<uint8_t> below_quantile;

    size_t size() const { return words.size(); }

    int32_t id_of(std::string_view w) const {
        auto it = ids.find(std::string(w));
        return it == ids.end() ? -1 : it->second;
    }

    bool contains(std::string_view w) const { return id_of(w) >= 0; }

    bool eligible(size_t i) const {
        return !is_stopword[i] && !below_min_count[i] && !below_quantile[i];
    }
};

// Flags a (word, count) universe with the ranking-eligibility filters:
// stopword membership, a minimum count, and a bottom-quantile cut over
// distinct words. Quantile boundary ties are kept.
inline Vocabulary build_vocabulary(const std::vector<std::pair<std::string, uint64_t>>& sorted_entries,
                                   const std::set<std::string>& stopwords,
                                   uint64_t min_count, double drop_quantile) {
    if (sorted_entries.empty())
        throw std::invalid_argument("cannot build vocabulary from an empty frequency table");
    if (drop_quantile < 0.0 || drop_quantile >= 1.0)
        throw std::invalid_argument("drop_quantile must be in [0, 1)");

    Vocabulary v;
    const size_t n = sorted_entries.size();
    v.words.reserve(n);
    v.freq.reserve(n);
    for (const auto& [w, c] : sorted_entries) {
        v.ids.emplace(w, static_cast<int32_t>(v.words.size()));
        v.words.push_back(w);
        v.freq.push_back(c);
    }

    // entries are sorted descending, so the quantile cut is taken from the
    // tail; cutoff is the frequency of the lowest kept word, and ties with
    // it stay eligible
    const size_t n_drop = static_cast<size_t>(drop_quantile * static_cast<double>(n));
    uint64_t cutoff = 0;
    if (n_drop > 0) cutoff = v.freq[n - n_drop - 1];

    v.is_stopword.resize(n);
    v.below_min_count.resize(n);
    v.below_quantile.resize(n);
    for (size_t i = 0; i < n; ++i) {
        v.is_stopword[i] = stopwords.count(v.words[i]) ? 1 : 0;
        v.below_min_count[i] = v.freq[i] < min_count ? 1 : 0;
        v.below_quantile[i] = (n_drop > 0 && v.freq[i] < cutoff) ? 1 : 0;
    }
    return v;
}

inline Vocabulary build_vocabulary(const FrequencyTable& ft,
                                   const std::set<std::string>& stopwords,
                                   uint64_t min_count, double drop_quantile) {
    if (ft.empty())
        throw std::invalid_argument("cannot build vocabulary from an empty frequency table");
    return build_vocabulary(ft.sorted(), stopwords, min_count, drop_quantile);
}

// Reads lines from plain or gzip files (zlib transparent mode handles
// both, so ".gz" and uncompressed inputs go through the same path).
class LineReader {
  public:
    explicit LineReader(const std::string& path) : path_(path) { open(); }

    ~LineReader() {
        if (gz_) gzclose(gz_);
    }

    LineReader(const LineReader&) = delete;
    LineReader& operator=(const LineReader&) = delete;

    bool next(std::string& line) {
        line.clear();
        while (true) {
            while (pos_ < len_) {
                char c = buf_[pos_++];
                if (c == '\n') {
                    if (!line.empty() && line.back() == '\r') line.pop_back();
                    return true;
                }
                line.push_back(c);
            }
            if (eof_) {
                if (!line.empty()) {
                    if (line.back() == '\r') line.pop_back();
                    return true;
                }
                return false;
            }
            fill();
        }
    }

    void reset() {
        if (gz_) gzclose(gz_);
        open();
    }

  private:
    void open() {
        gz_ = gzopen(path_.c_str(), "rb");
        if (!gz_) throw std::runtime_error("cannot open corpus file: " + path_);
        gzbuffer(gz_, 1 << 18);
        pos_ = len_ = 0;
        eof_ = false;
    }

    void fill() {
        int n = gzread(gz_, buf_, sizeof(buf_));
        if (n < 0) throw std::runtime_error("read error on corpus file: " + path_);
        len_ = static_cast<size_t>(n);
        pos_ = 0;
        if (len_ == 0) eof_ = true;
    }

    std::string path_;
    gzFile gz_ = nullptr;
    char buf_[1 << 16];
    size_t pos_ = 0, len_ = 0;
    bool eof_ = false;
};

}  // namespace wordshift
