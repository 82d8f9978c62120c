#pragma once

#include <cstdlib>
#include <string>
#include <string_view>
#include <vector>

#include "kinetgan/error.hpp"

namespace kinetgan::detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

inline std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
        if (i > start) out.emplace_back(s.substr(start, i - start));
    }
    return out;
}

// Strict double parse: the whole token must be consumed.
inline bool parse_double(const std::string& token, double* out) {
    if (token.empty()) return false;
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size()) return false;
    *out = v;
    return true;
}

inline bool parse_u64(const std::string& token, std::uint64_t* out) {
    if (token.empty()) return false;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(token.c_str(), &end, 10);
    if (end != token.c_str() + token.size()) return false;
    *out = static_cast<std::uint64_t>(v);
    return true;
}

// Splits text into lines, strips '#' comments and whitespace. Yields
// (line_number, content) for non-empty lines.
inline std::vector<std::pair<int, std::string>> content_lines(const std::string& text) {
    std::vector<std::pair<int, std::string>> out;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        ++line_no;
        std::string line = text.substr(pos, end - pos);
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (!line.empty()) out.emplace_back(line_no, std::move(line));
        if (end == text.size()) break;
        pos = end + 1;
    }
    return out;
}

[[noreturn]] inline void fail_at(const std::string& what, int line) {
    throw Error(what + " (line " + std::to_string(line) + ")");
}

}  // namespace kinetgan::detail
