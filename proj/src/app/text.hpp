#pragma once

#include "usv/common.hpp"

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace usv::app::detail {

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> tokens(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

struct Line {
    int number;
    std::string_view text;  // trimmed, non-empty, not a comment
};

inline std::vector<Line> content_lines(std::string_view text) {
    std::vector<Line> out;
    int number = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        ++number;
        const auto t = trim(raw);
        if (!t.empty() && t.front() != '#') out.push_back({number, t});
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return out;
}

inline std::string where(int line) { return "line " + std::to_string(line) + ": "; }

inline double to_double(std::string_view token, int line, ErrorCode code = ErrorCode::parse) {
    double v = 0.0;
    const char* first = token.data();
    if (!token.empty() && token.front() == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw Error(code, where(line) + "expected a number, found '" + std::string(token) + "'");
    }
    return v;
}

inline std::int64_t to_int(std::string_view token, int line, ErrorCode code = ErrorCode::parse) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw Error(code, where(line) + "expected an integer, found '" + std::string(token) + "'");
    }
    return v;
}

inline ObjectClass to_class(std::string_view token, int line, ErrorCode code = ErrorCode::parse) {
    const auto c = parse_class(token);
    if (!c) throw Error(code, where(line) + "unknown class '" + std::string(token) + "'");
    return *c;
}

}  // namespace usv::app::detail
