#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "drift/error.hpp"
#include "drift/io.hpp"

namespace drift {

inline constexpr std::size_t kDefaultMaxDiffChars = 20000;
inline constexpr std::string_view kTruncationMarker = "[TRUNCATED]";

// Cuts at the last complete line that fits in max_chars and appends the
// marker line. Text already truncated at this cap is returned unchanged.
inline std::string truncate_diff(std::string_view text, std::size_t max_chars) {
    if (max_chars == 0)
        throw Error("truncate_diff: max_chars must be positive");
    if (text.size() <= max_chars)
        return std::string(text);
    const std::size_t m = kTruncationMarker.size();
    bool already = text.size() >= m && text.substr(text.size() - m) == kTruncationMarker &&
                   (text.size() == m || text[text.size() - m - 1] == '\n') && text.size() - m <= max_chars;
    if (already)
        return std::string(text);
    auto nl = text.rfind('\n', max_chars - 1);
    std::string out = nl == std::string_view::npos ? std::string() : std::string(text.substr(0, nl + 1));
    out += kTruncationMarker;
    return out;
}

struct Hunk {
    int old_start = 0;
    int old_count = 0;
    int new_start = 0;
    int new_count = 0;
    std::string context_header;
    std::vector<std::string> added_lines;
    std::vector<std::string> removed_lines;
    std::size_t context_lines = 0;
    std::vector<std::string> enclosing_symbols; // definitions whose bodies contain changed lines
    bool complete = true; // false only for a final hunk cut by truncation
};

struct UnifiedDiff {
    std::string path;     // post-side path ("" when unknown)
    std::string old_path; // pre-side path; differs from path for renames
    std::vector<Hunk> hunks;
    bool truncated = false;
    bool new_file = false;
    bool deleted_file = false;
    bool binary = false;
    std::optional<int> similarity; // "similarity index N%"

    std::size_t added_total() const {
        std::size_t n = 0;
        for (const auto& h : hunks)
            n += h.added_lines.size();
        return n;
    }
    std::size_t removed_total() const {
        std::size_t n = 0;
        for (const auto& h : hunks)
            n += h.removed_lines.size();
        return n;
    }
};

namespace detail {

inline bool starts_with(std::string_view s, std::string_view prefix) {
    return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

inline std::string strip_diff_prefix(std::string_view p) {
    if (p == "/dev/null")
        return "";
    auto tab = p.find('\t');
    if (tab != std::string_view::npos)
        p = p.substr(0, tab);
    if (starts_with(p, "a/") || starts_with(p, "b/"))
        p.remove_prefix(2);
    return std::string(p);
}

} // namespace detail

inline std::vector<std::string> definitions_in(std::string_view line);

namespace detail {

inline std::size_t indent_of(std::string_view line) {
    std::size_t n = 0;
    while (n < line.size() && (line[n] == ' ' || line[n] == '\t'))
        ++n;
    return n;
}

} // namespace detail

// Parses git unified-diff output for a single file. Hunk bodies must match
// their @@ counts; the only tolerated shortfall is a final hunk cut off by
// the truncation marker.
inline UnifiedDiff parse_unified_diff(std::string_view text) {
    static const std::regex hunk_re(R"(^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@ ?(.*)$)");
    UnifiedDiff diff;
    auto lines = split_lines(text);
    if (!lines.empty() && lines.back() == kTruncationMarker) {
        diff.truncated = true;
        lines.pop_back();
    }

    std::size_t i = 0;
    auto body_line = [](const std::string& l) {
        return l.empty() || l[0] == ' ' || l[0] == '+' || l[0] == '-' || l[0] == '\\';
    };
    while (i < lines.size()) {
        const std::string& line = lines[i];
        if (!detail::starts_with(line, "@@")) {
            if (detail::starts_with(line, "diff --git ")) {
                // "diff --git a/x b/y": good enough when no ---/+++ lines follow (binary, pure rename)
                auto rest = std::string_view(line).substr(11);
                auto sep = rest.find(" b/");
                if (sep != std::string_view::npos) {
                    diff.old_path = detail::strip_diff_prefix(rest.substr(0, sep));
                    diff.path = std::string(rest.substr(sep + 3));
                }
            } else if (detail::starts_with(line, "--- ")) {
                auto p = detail::strip_diff_prefix(std::string_view(line).substr(4));
                if (!p.empty())
                    diff.old_path = p;
            } else if (detail::starts_with(line, "+++ ")) {
                auto p = detail::strip_diff_prefix(std::string_view(line).substr(4));
                if (!p.empty())
                    diff.path = p;
            } else if (detail::starts_with(line, "rename from ")) {
                diff.old_path = line.substr(12);
            } else if (detail::starts_with(line, "rename to ")) {
                diff.path = line.substr(10);
            } else if (detail::starts_with(line, "similarity index ")) {
                diff.similarity = std::atoi(line.c_str() + 17);
            } else if (detail::starts_with(line, "new file mode")) {
                diff.new_file = true;
            } else if (detail::starts_with(line, "deleted file mode")) {
                diff.deleted_file = true;
            } else if (detail::starts_with(line, "Binary files ") || line == "GIT binary patch") {
                diff.binary = true;
            }
            ++i;
            continue;
        }

        std::smatch m;
        if (!std::regex_match(line, m, hunk_re))
            throw ParseError(i + 1, "malformed hunk header in hunk " + std::to_string(diff.hunks.size()) + ": " + line);
        Hunk h;
        h.old_start = std::stoi(m[1]);
        h.old_count = m[2].matched ? std::stoi(m[2]) : 1;
        h.new_start = std::stoi(m[3]);
        h.new_count = m[4].matched ? std::stoi(m[4]) : 1;
        h.context_header = m[5];
        ++i;

        int old_seen = 0, new_seen = 0;
        std::optional<std::pair<std::string, std::size_t>> last_def; // name, indent
        while ((old_seen < h.old_count || new_seen < h.new_count) && i < lines.size() && body_line(lines[i])) {
            const std::string& b = lines[i];
            char tag = b.empty() ? ' ' : b[0];
            std::string content = b.empty() ? std::string() : b.substr(1);
            auto defs = definitions_in(content);
            bool blank = content.find_first_not_of(" \t") == std::string::npos;
            if ((tag == '+' || tag == '-') && defs.empty() && !blank && last_def &&
                detail::indent_of(content) > last_def->second &&
                std::find(h.enclosing_symbols.begin(), h.enclosing_symbols.end(), last_def->first) == h.enclosing_symbols.end())
                h.enclosing_symbols.push_back(last_def->first);
            if (!defs.empty())
                last_def.emplace(defs.back(), detail::indent_of(content));
            if (tag == ' ') {
                ++old_seen;
                ++new_seen;
                ++h.context_lines;
            } else if (tag == '-') {
                ++old_seen;
                h.removed_lines.push_back(std::move(content));
            } else if (tag == '+') {
                ++new_seen;
                h.added_lines.push_back(std::move(content));
            }
            ++i;
        }
        while (i < lines.size() && detail::starts_with(lines[i], "\\"))
            ++i; // "\ No newline at end of file"

        bool short_body = old_seen < h.old_count || new_seen < h.new_count;
        if (short_body && !(diff.truncated && i == lines.size()))
            throw ParseError(i + 1, "hunk " + std::to_string(diff.hunks.size()) + " declares -" + std::to_string(h.old_count) +
                                        " +" + std::to_string(h.new_count) + " lines but has -" + std::to_string(old_seen) +
                                        " +" + std::to_string(new_seen));
        bool overflow = i < lines.size() && !lines[i].empty() && (lines[i][0] == '+' || lines[i][0] == '-' || lines[i][0] == ' ') &&
                        !detail::starts_with(lines[i], "--- ") && !detail::starts_with(lines[i], "+++ ");
        if (overflow || old_seen > h.old_count || new_seen > h.new_count)
            throw ParseError(i + 1, "hunk " + std::to_string(diff.hunks.size()) + " body exceeds its declared counts");
        h.complete = !short_body;
        diff.hunks.push_back(std::move(h));
    }
    if (diff.old_path.empty())
        diff.old_path = diff.path;
    if (diff.path.empty())
        diff.path = diff.old_path;
    return diff;
}

namespace detail {

inline void push_unique(std::vector<std::string>& out, std::string s) {
    if (!s.empty() && std::find(out.begin(), out.end(), s) == out.end())
        out.push_back(std::move(s));
}

inline const std::regex& definition_regex() {
    static const std::regex re(
        R"((?:^|[^A-Za-z0-9_])(?:def|class|fn|func|function)\s+(?:\([^)]*\)\s*)?([A-Za-z_$][A-Za-z0-9_$]*))");
    return re;
}

} // namespace detail

// Names defined on a line via def/class/fn/func/function, in order of appearance.
inline std::vector<std::string> definitions_in(std::string_view line) {
    std::vector<std::string> out;
    std::string s(line);
    for (auto it = std::sregex_iterator(s.begin(), s.end(), detail::definition_regex()); it != std::sregex_iterator(); ++it)
        detail::push_unique(out, (*it)[1]);
    return out;
}

// Symbol from git's function-context header: a keyword definition if present,
// otherwise the identifier right before the first '(' (C-like signatures).
inline std::optional<std::string> header_symbol(std::string_view header) {
    auto defs = definitions_in(header);
    if (!defs.empty())
        return defs.front();
    static const std::regex call_re(R"(([A-Za-z_][A-Za-z0-9_:]*)\s*\()");
    std::string s(header);
    std::smatch m;
    if (std::regex_search(s, m, call_re)) {
        std::string name = m[1];
        static const char* const kKeywords[] = {"if", "for", "while", "switch", "return", "sizeof", "catch"};
        for (const char* k : kKeywords)
            if (name == k)
                return std::nullopt;
        return name;
    }
    return std::nullopt;
}

// Candidate symbols touched by a diff: hunk context headers first, then
// definitions enclosing changed lines, then definitions on added/removed lines.
inline std::vector<std::string> extract_symbols(const UnifiedDiff& diff) {
    std::vector<std::string> out;
    for (const auto& h : diff.hunks)
        if (auto s = header_symbol(h.context_header))
            detail::push_unique(out, *s);
    for (const auto& h : diff.hunks)
        for (const auto& s : h.enclosing_symbols)
            detail::push_unique(out, s);
    for (const auto& h : diff.hunks) {
        for (const auto& l : h.removed_lines)
            for (auto& s : definitions_in(l))
                detail::push_unique(out, std::move(s));
        for (const auto& l : h.added_lines)
            for (auto& s : definitions_in(l))
                detail::push_unique(out, std::move(s));
    }
    return out;
}

// Definitions that start in column 0 (module-level), for whole-file views.
inline std::vector<std::string> top_level_definitions(std::string_view content) {
    std::vector<std::string> out;
    for (const auto& line : split_lines(content)) {
        if (line.empty() || line[0] == ' ' || line[0] == '\t')
            continue;
        for (auto& s : definitions_in(line))
            detail::push_unique(out, std::move(s));
    }
    return out;
}

} // namespace drift
