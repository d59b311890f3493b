#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "drift/change.hpp"
#include "drift/diff.hpp"
#include "drift/llm.hpp"
#include "drift/manifest.hpp"
#include "drift/parallel.hpp"
#include "drift/text.hpp"

namespace drift {

enum class SummaryBackend { Service, Heuristic };

inline const char* to_string(SummaryBackend b) { return b == SummaryBackend::Service ? "service" : "heuristic"; }

struct DeltaSummary {
    NormalizedPath path;
    std::optional<NormalizedPath> old_path; // renames
    ChangeStatus status;
    std::string text;
    std::size_t sentence_count = 0;
    bool formatting_only = false;
    SummaryBackend backend = SummaryBackend::Heuristic;
    std::vector<std::string> symbols;
};

inline constexpr std::string_view kSummarizerSystemPrompt =
    "You are a senior software engineer helping with code review.\n"
    "You'll be given a unified git diff for a SINGLE file and its file path(s).\n"
    "Explain in 3–5 short sentences what the change does. Name affected functions/classes/configs.\n"
    "Avoid speculation; if unclear or formatting-only, say so.";

namespace detail {

// Line with comments stripped, whitespace removed and quote characters unified.
inline std::string formatting_canonical(std::string_view line) {
    std::string out;
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quote) {
            if (c == '\\' && i + 1 < line.size()) {
                out += c;
                out += line[++i];
                continue;
            }
            if (c == quote) {
                quote = 0;
                out += '"';
                continue;
            }
            if (!std::isspace(static_cast<unsigned char>(c)))
                out += c;
            continue;
        }
        if (c == '#' || (c == '/' && i + 1 < line.size() && line[i + 1] == '/'))
            break;
        if (c == '"' || c == '\'') {
            quote = c;
            out += '"';
            continue;
        }
        if (!std::isspace(static_cast<unsigned char>(c)))
            out += c;
    }
    return out;
}

inline std::vector<std::string> canonical_lines(const std::vector<std::string>& lines) {
    std::vector<std::string> out;
    for (const auto& l : lines) {
        auto c = formatting_canonical(l);
        if (!c.empty())
            out.push_back(std::move(c));
    }
    return out;
}

inline std::string plural(std::size_t n, const char* word) {
    return std::to_string(n) + " " + word + (n == 1 ? "" : "s");
}

inline std::string symbol_list(const std::vector<std::string>& symbols, std::size_t limit = 8) {
    std::string out;
    for (std::size_t i = 0; i < symbols.size() && i < limit; ++i)
        out += (i ? ", `" : "`") + symbols[i] + "`";
    if (symbols.size() > limit)
        out += " and " + std::to_string(symbols.size() - limit) + " more";
    return out;
}

} // namespace detail

// True when every hunk's removed and added lines agree once whitespace,
// quote style and comments are ignored.
inline bool is_formatting_only(const UnifiedDiff& diff) {
    if (diff.binary)
        return false;
    bool changed = false;
    for (const auto& h : diff.hunks) {
        if (!h.added_lines.empty() || !h.removed_lines.empty())
            changed = true;
        if (detail::canonical_lines(h.removed_lines) != detail::canonical_lines(h.added_lines))
            return false;
    }
    return changed;
}

inline bool is_trivial_change(ChangeStatus status, const UnifiedDiff& diff) {
    return status == ChangeStatus::Deleted || diff.hunks.empty();
}

inline DeltaSummary heuristic_summary(const ChangeEntry& entry, const UnifiedDiff& diff) {
    DeltaSummary s{entry.path, entry.old_path, entry.status, {}, 0, false, SummaryBackend::Heuristic, extract_symbols(diff)};
    const std::string& path = entry.path.str();
    std::ostringstream out;
    std::size_t hunks = diff.hunks.size();
    std::size_t added = diff.added_total(), removed = diff.removed_total();

    auto symbols_sentence = [&](const char* lead) {
        if (s.symbols.empty())
            out << " No named symbols were detected in the changed regions.";
        else
            out << " " << lead << " " << detail::symbol_list(s.symbols) << ".";
    };

    switch (entry.status) {
    case ChangeStatus::Deleted:
        out << "Deleted file " << path << ".";
        if (removed)
            out << " Removes all " << detail::plural(removed, "line") << ".";
        if (!s.symbols.empty())
            out << " Previously defined " << detail::symbol_list(s.symbols) << ".";
        break;
    case ChangeStatus::Added:
        out << "Added file " << path << " with " << detail::plural(added, "line") << ".";
        if (!s.symbols.empty())
            out << " Defines " << detail::symbol_list(s.symbols) << ".";
        break;
    case ChangeStatus::Renamed:
        if (hunks == 0) {
            out << "Renamed from " << entry.old_path->str() << "; rename only; content unchanged.";
            break;
        }
        out << "Renamed from " << entry.old_path->str() << " to " << path << " with content edits in "
            << detail::plural(hunks, "hunk") << ".";
        out << " Adds " << detail::plural(added, "line") << " and removes " << detail::plural(removed, "line") << ".";
        symbols_sentence("Affected symbols:");
        break;
    case ChangeStatus::Modified:
        if (diff.binary) {
            out << "Binary content of " << path << " changed.";
        } else if (hunks == 0 || is_formatting_only(diff)) {
            s.formatting_only = true;
            out << "This is a formatting-only change; no functional change.";
            if (hunks)
                out << " Touches " << detail::plural(hunks, "hunk") << " in " << path << " where " << added
                    << " added and " << removed << " removed lines differ only in whitespace, quote style, or comments.";
            else
                out << " Only line-ending whitespace or file metadata of " << path << " changed.";
        } else {
            out << "Modifies " << detail::plural(hunks, "hunk") << " in " << path << ".";
            out << " Adds " << detail::plural(added, "line") << " and removes " << detail::plural(removed, "line") << ".";
            symbols_sentence("Affected symbols:");
        }
        break;
    }
    if (diff.truncated)
        out << " The diff was truncated before summarization.";
    s.text = out.str();
    s.sentence_count = count_sentences(s.text);
    return s;
}

inline ChatRequest summarizer_request(const ChangeEntry& entry, const std::string& diff_text) {
    std::string user = "- path: " + entry.path.str() + "\n";
    if (entry.old_path)
        user += "- previous path: " + entry.old_path->str() + "\n";
    user += "- unified_diff: ```patch\n" + diff_text + (diff_text.empty() || diff_text.back() == '\n' ? "" : "\n") + "```";
    return {{{"system", std::string(kSummarizerSystemPrompt)}, {"user", user}}, 0.2};
}

struct SummarizeOptions {
    ChatBackend* service = nullptr; // null selects the heuristic backend
    std::size_t max_diff_chars = kDefaultMaxDiffChars;
    std::size_t workers = 4;
};

// Sentence bounds a service reply must meet: 3-5, or 1-5 for deletes and
// hunk-free diffs where three sentences would be padding.
inline bool acceptable_sentence_count(std::size_t n, bool trivial) { return n >= (trivial ? 1u : 3u) && n <= 5; }

// Summarizes one file. The service path retries once on a reply outside the
// sentence bounds and falls back to the heuristic on any failure.
inline DeltaSummary summarize(const ChangeEntry& entry, const std::string& raw_diff, const SummarizeOptions& opts) {
    std::string diff_text = truncate_diff(raw_diff, opts.max_diff_chars);
    UnifiedDiff diff = parse_unified_diff(diff_text);
    if (!opts.service)
        return heuristic_summary(entry, diff);

    bool trivial = is_trivial_change(entry.status, diff);
    auto request = summarizer_request(entry, diff_text);
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string reply;
        try {
            reply = collapse_whitespace(opts.service->complete(request));
        } catch (const ServiceError&) {
            break;
        }
        std::size_t n = count_sentences(reply);
        if (!acceptable_sentence_count(n, trivial))
            continue;
        DeltaSummary s{entry.path, entry.old_path, entry.status, reply, n, states_no_functional_change(reply),
                       SummaryBackend::Service, extract_symbols(diff)};
        return s;
    }
    return heuristic_summary(entry, diff);
}

// Summarizes every change of a manifest from its captured diffs and writes
// the texts into changes[].summary.
template <typename DiffSource>
std::vector<DeltaSummary> summarize_manifest(ChangeManifest& manifest, DiffSource&& diff_for, const SummarizeOptions& opts) {
    auto summaries = parallel_map(manifest.changes, opts.workers,
                                  [&](const ChangeEntry& e) { return summarize(e, diff_for(e), opts); });
    for (std::size_t i = 0; i < summaries.size(); ++i)
        manifest.changes[i].summary = summaries[i].text;
    return summaries;
}

// Rebuilds summary records from a bundle whose changes already carry text.
inline std::vector<DeltaSummary> summaries_from_manifest(const ChangeManifest& manifest) {
    std::vector<DeltaSummary> out;
    for (const auto& c : manifest.changes) {
        if (!c.summary)
            continue;
        out.push_back({c.path, c.old_path, c.status, *c.summary, count_sentences(*c.summary),
                       states_no_functional_change(*c.summary), SummaryBackend::Heuristic, backticked(*c.summary)});
    }
    return out;
}

} // namespace drift
