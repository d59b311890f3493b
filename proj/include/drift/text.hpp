#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <map>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace drift {

inline bool is_stopword(std::string_view t) {
    static const std::set<std::string, std::less<>> kStop = {
        "a",    "an",   "and",  "are",   "as",    "at",   "be",  "by",   "does", "do",    "for",  "from",
        "how",  "in",   "is",   "it",    "its",   "of",   "on",  "or",   "that", "the",   "this", "to",
        "was",  "what", "when", "where", "which", "who",  "why", "with", "file", "files", "code", "window"};
    return kStop.count(t) != 0;
}

// Case-folded runs of [A-Za-z0-9_]. Identifiers with underscores also yield
// their parts, so `init_db` matches both "init_db" and "init".
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (cur.empty())
            return;
        out.push_back(cur);
        if (cur.find('_') != std::string::npos) {
            std::string part;
            for (char c : cur) {
                if (c == '_') {
                    if (!part.empty())
                        out.push_back(part);
                    part.clear();
                } else {
                    part += c;
                }
            }
            if (!part.empty() && part != cur)
                out.push_back(part);
        }
        cur.clear();
    };
    for (char c : text) {
        auto uc = static_cast<unsigned char>(c);
        if (std::isalnum(uc) || c == '_')
            cur += static_cast<char>(std::tolower(uc));
        else
            flush();
    }
    flush();
    return out;
}

inline std::vector<std::string> content_tokens(std::string_view text) {
    auto all = tokenize(text);
    std::vector<std::string> out;
    for (auto& t : all)
        if (!is_stopword(t))
            out.push_back(std::move(t));
    return out;
}

inline std::map<std::string, int> term_counts(const std::vector<std::string>& tokens) {
    std::map<std::string, int> tf;
    for (const auto& t : tokens)
        ++tf[t];
    return tf;
}

// Sentences end at '.', '!' or '?' followed by whitespace or end of text.
inline std::size_t count_sentences(std::string_view text) {
    std::size_t count = 0;
    bool pending = false; // non-space content since the last terminator
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        bool terminator = (c == '.' || c == '!' || c == '?') &&
                          (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1])));
        if (terminator) {
            if (pending)
                ++count;
            pending = false;
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            pending = true;
        }
    }
    if (pending)
        ++count;
    return count;
}

inline std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j)
        prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

// 1 - edit_distance / max_len; two empty strings are identical.
inline double path_similarity(std::string_view a, std::string_view b) {
    std::size_t len = std::max(a.size(), b.size());
    if (len == 0)
        return 1.0;
    return 1.0 - static_cast<double>(edit_distance(a, b)) / static_cast<double>(len);
}

// `symbol` spans in order of appearance, without the backticks.
inline std::vector<std::string> backticked(std::string_view text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        auto open = text.find('`', pos);
        if (open == std::string_view::npos)
            break;
        auto close = text.find('`', open + 1);
        if (close == std::string_view::npos)
            break;
        std::string sym(text.substr(open + 1, close - open - 1));
        if (!sym.empty() && std::find(out.begin(), out.end(), sym) == out.end())
            out.push_back(std::move(sym));
        pos = close + 1;
    }
    return out;
}

inline std::string strip_backticked(std::string_view text) {
    std::string out;
    bool inside = false;
    for (char c : text) {
        if (c == '`')
            inside = !inside;
        else if (!inside)
            out += c;
    }
    return out;
}

// True when the text outside backticks carries something path-like: a token
// with a '/' between name characters, or a name with a common source/doc extension.
inline bool mentions_file_path(std::string_view text) {
    static const std::regex slash_re(R"([A-Za-z0-9_.\-]+/[A-Za-z0-9_.\-]+)");
    static const std::regex ext_re(
        R"(\b[A-Za-z0-9_\-]+\.(py|pyi|ts|tsx|js|jsx|go|rs|java|kt|scala|c|cc|cpp|h|hpp|m|mm|php|rb|swift|cs|sql|sh|bash|zsh|html|css|scss|sass|vue|md|rst|txt|toml|cfg|ini|json|yaml|yml|lock)\b)");
    std::string plain = strip_backticked(text);
    return std::regex_search(plain, slash_re) || std::regex_search(plain, ext_re);
}

inline bool states_no_functional_change(std::string_view text) {
    static const std::regex re(R"(no functional change|formatting[- ]only|non-functional|no behavio(u)?ral change)",
                               std::regex::icase);
    std::string s(text);
    return std::regex_search(s, re);
}

inline std::string collapse_whitespace(std::string_view text) {
    std::string out;
    bool space = false;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            space = !out.empty();
        } else {
            if (space)
                out += ' ';
            out += c;
            space = false;
        }
    }
    return out;
}

} // namespace drift
