#pragma once

// Canonical answer strings for voting.
//
// Extraction, applied repeatedly until the text stops changing:
//   1. innermost \boxed{...} content, if any;
//   2. otherwise, if the text reads as prose (some word of two or more
//      letters), its last numeric token;
//   3. otherwise the text itself.
// Each pass then collapses whitespace, trims, strips trailing periods, and
// drops thousands separators from plain numbers. Iterating to a fixpoint
// makes the result idempotent.

#include <cctype>
#include <optional>
#include <string>
#include <string_view>

#include "sind/error.hpp"

namespace sind::reprio {

namespace detail {

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

/// Content of the last \boxed{...} with balanced braces. The last opening
/// marker is also the innermost one when boxes nest.
inline std::optional<std::string> boxed_content(std::string_view s) {
    constexpr std::string_view marker = "\\boxed{";
    auto start = s.rfind(marker);
    while (start != std::string_view::npos) {
        std::size_t i = start + marker.size();
        int depth = 1;
        for (; i < s.size(); ++i) {
            if (s[i] == '{') ++depth;
            else if (s[i] == '}' && --depth == 0) break;
        }
        if (depth == 0) return std::string(s.substr(start + marker.size(), i - start - marker.size()));
        if (start == 0) break;
        start = s.rfind(marker, start - 1);
    }
    return std::nullopt;
}

inline bool looks_like_prose(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        std::size_t j = i;
        while (j < s.size() && !is_space(s[j])) ++j;
        std::string_view word = s.substr(i, j - i);
        while (!word.empty() && std::string_view(".,:;!?").find(word.back()) != std::string_view::npos)
            word.remove_suffix(1);
        bool letters = word.size() >= 2;
        for (char c : word) letters = letters && is_alpha(c);
        if (letters) return true;
        i = j;
    }
    return false;
}

/// Last integer or decimal, thousands separators allowed, optional leading
/// minus when it starts a token.
inline std::optional<std::string> last_number(std::string_view s) {
    std::optional<std::string> last;
    std::size_t i = 0;
    while (i < s.size()) {
        if (!is_digit(s[i]) || (i > 0 && (is_digit(s[i - 1]) || s[i - 1] == '.' || s[i - 1] == ','))) {
            ++i;
            continue;
        }
        std::size_t begin = i;
        if (i > 0 && s[i - 1] == '-' && (i == 1 || !(is_digit(s[i - 2]) || is_alpha(s[i - 2]) || s[i - 2] == ')')))
            begin = i - 1;
        std::size_t j = i;
        while (j < s.size() && is_digit(s[j])) ++j;
        while (j + 3 < s.size() && s[j] == ',' && is_digit(s[j + 1]) && is_digit(s[j + 2]) && is_digit(s[j + 3]) &&
               (j + 4 >= s.size() || !is_digit(s[j + 4])))
            j += 4;
        if (j + 1 < s.size() && s[j] == '.' && is_digit(s[j + 1])) {
            j += 1;
            while (j < s.size() && is_digit(s[j])) ++j;
        }
        last = std::string(s.substr(begin, j - begin));
        i = j;
    }
    return last;
}

inline bool is_grouped_number(std::string_view s) {
    std::size_t i = 0;
    if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;
    std::size_t lead = 0;
    while (i < s.size() && is_digit(s[i])) ++i, ++lead;
    if (lead < 1 || lead > 3) return false;
    bool grouped = false;
    while (i < s.size() && s[i] == ',') {
        if (i + 4 > s.size() || !is_digit(s[i + 1]) || !is_digit(s[i + 2]) || !is_digit(s[i + 3])) return false;
        i += 4;
        grouped = true;
    }
    if (i < s.size() && s[i] == '.') {
        ++i;
        if (i == s.size()) return false;
        while (i < s.size() && is_digit(s[i])) ++i;
    }
    return grouped && i == s.size();
}

inline std::string cleanup(std::string_view s) {
    std::string out;
    bool pending_space = false;
    for (char c : s) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    while (!out.empty() && (out.back() == '.' || out.back() == ' ')) out.pop_back();
    if (is_grouped_number(out)) std::erase(out, ',');
    return out;
}

inline std::string extract_once(std::string_view s) {
    if (auto boxed = boxed_content(s)) return cleanup(*boxed);
    if (looks_like_prose(s)) {
        if (auto num = last_number(s)) return cleanup(*num);
        return {};
    }
    return cleanup(s);
}

} // namespace detail

inline std::string normalize_answer(std::string_view raw) {
    std::string current(raw);
    for (int pass = 0; pass < 32; ++pass) {
        std::string next = detail::extract_once(current);
        if (next.empty())
            throw no_answer_error("no extractable answer in '" + std::string(raw.substr(0, 80)) + "'");
        if (next == current) return next;
        current = std::move(next);
    }
    return current;
}

/// normalize_answer, with nullopt in place of the no-answer error.
inline std::optional<std::string> try_normalize_answer(std::string_view raw) {
    try {
        return normalize_answer(raw);
    } catch (const no_answer_error&) {
        return std::nullopt;
    }
}

} // namespace sind::reprio
