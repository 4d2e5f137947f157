#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wordshift {

// Decode one UTF-8 code point starting at s[i]; advances i. Invalid byte
// sequences decode to U+FFFD and advance one byte.
inline uint32_t utf8_next(std::string_view s, size_t& i) {
    const unsigned char b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    auto cont = [&](size_t k) {
        return i + k < s.size() &&
               (static_cast<unsigned char>(s[i + k]) & 0xc0) == 0x80;
    };
    auto byte = [&](size_t k) {
        return static_cast<uint32_t>(static_cast<unsigned char>(s[i + k]) & 0x3f);
    };
    if ((b0 & 0xe0) == 0xc0 && cont(1)) {
        uint32_t cp = (static_cast<uint32_t>(b0 & 0x1f) << 6) | byte(1);
        i += 2;
        return cp >= 0x80 ? cp : 0xFFFD;
    }
    if ((b0 & 0xf0) == 0xe0 && cont(1) && cont(2)) {
        uint32_t cp = (static_cast<uint32_t>(b0 & 0x0f) << 12) | (byte(1) << 6) | byte(2);
        i += 3;
        return cp >= 0x800 ? cp : 0xFFFD;
    }
    if ((b0 & 0xf8) == 0xf0 && cont(1) && cont(2) && cont(3)) {
        uint32_t cp = (static_cast<uint32_t>(b0 & 0x07) << 18) | (byte(1) << 12) |
                      (byte(2) << 6) | byte(3);
        i += 4;
        return (cp >= 0x10000 && cp <= 0x10FFFF) ? cp : 0xFFFD;
    }
    ++i;
    return 0xFFFD;
}

inline void utf8_append(std::string& out, uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
        out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
}

inline std::vector<uint32_t> utf8_decode(std::string_view s) {
    std::vector<uint32_t> cps;
    size_t i = 0;
    while (i < s.size()) cps.push_back(utf8_next(s, i));
    return cps;
}

enum class Script : uint8_t { Latin, Cyrillic, Greek, Hebrew, Arabic };

inline Script script_from_name(std::string_view name) {
    if (name == "latin") return Script::Latin;
    if (name == "cyrillic") return Script::Cyrillic;
    if (name == "greek") return Script::Greek;
    if (name == "hebrew") return Script::Hebrew;
    if (name == "arabic") return Script::Arabic;
    throw std::invalid_argument("unknown script name: " + std::string(name));
}

// Codepoint-range membership for the scripts we support. Coverage is the
// basic blocks plus the common extensions; not the full Unicode property.
inline bool in_script(uint32_t cp, Script s) {
    switch (s) {
        case Script::Latin:
            return (cp >= 'A' && cp <= 'Z') || (cp >= 'a' && cp <= 'z') ||
                   (cp >= 0xC0 && cp <= 0xFF && cp != 0xD7 && cp != 0xF7) ||
                   (cp >= 0x100 && cp <= 0x24F);
        case Script::Cyrillic:
            return (cp >= 0x400 && cp <= 0x4FF) || (cp >= 0x500 && cp <= 0x52F);
        case Script::Greek:
            return (cp >= 0x370 && cp <= 0x3FF) || (cp >= 0x1F00 && cp <= 0x1FFF);
        case Script::Hebrew:
            return cp >= 0x590 && cp <= 0x5FF;
        case Script::Arabic:
            return (cp >= 0x600 && cp <= 0x6FF) || (cp >= 0x750 && cp <= 0x77F);
    }
    return false;
}

inline bool is_emoji(uint32_t cp) {
    return (cp >= 0x1F000 && cp <= 0x1FAFF) ||  // pictographs, emoticons, symbols
           (cp >= 0x2600 && cp <= 0x27BF) ||    // misc symbols, dingbats
           (cp >= 0x2B00 && cp <= 0x2BFF);      // misc symbols and arrows (stars)
}

inline bool is_unicode_punct(uint32_t cp) {
    if (cp < 0x80)
        return (cp >= '!' && cp <= '/') || (cp >= ':' && cp <= '@') ||
               (cp >= '[' && cp <= '`') || (cp >= '{' && cp <= '~');
    return (cp >= 0x2010 && cp <= 0x2027) ||  // dashes, quotes, bullets
           (cp >= 0x2030 && cp <= 0x205E) ||
           cp == 0xA1 || cp == 0xBF ||        // inverted ! and ?
           cp == 0xAB || cp == 0xBB ||        // guillemets
           cp == 0x60C || cp == 0x61F ||      // Arabic comma, question mark
           cp == 0x5BE || cp == 0x5F3 || cp == 0x5F4;  // Hebrew maqaf, geresh
}

// Simplified case folding: ASCII, Latin-1, Latin Extended-A, Greek,
// Cyrillic. Sufficient for the supported scripts; anything else is
// passed through unchanged.
inline uint32_t fold_lower(uint32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
    if (cp >= 0x100 && cp <= 0x137) return (cp % 2 == 0) ? cp + 1 : cp;
    if (cp >= 0x139 && cp <= 0x148) return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp >= 0x14A && cp <= 0x177) return (cp % 2 == 0) ? cp + 1 : cp;
    if (cp >= 0x179 && cp <= 0x17E) return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
    if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
    if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
    return cp;
}

inline std::string lowercase_utf8(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    size_t i = 0;
    while (i < s.size()) utf8_append(out, fold_lower(utf8_next(s, i)));
    return out;
}

}  // namespace wordshift
