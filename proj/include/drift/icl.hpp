#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "drift/io.hpp"
#include "drift/summarize.hpp"
#include "drift/text.hpp"

namespace drift {

inline constexpr std::string_view kStrictOutputRules =
    "Strict output rules:\n"
    "- Output ONLY a JSON array of unique strings with exact, complete, root-relative paths (no leading '/', './', "
    "'../').\n"
    "- Do NOT include any commentary, reasoning, explanations, or trailing text. Example: [\"a.py\", \"dir/b.py\"]\n"
    "- If you are not confident any paths are relevant or still exist, return [].";

inline const std::string& icl_system_template() {
    static const std::string kTemplate =
        "You are a codebase assistant with prior knowledge of this repository (from fine-tuning).\n"
        "At inference time, you are ALSO given *Delta Updates* that describe changes which occurred\n"
        "after your training snapshot. Treat these updates as patches that override or extend your\n"
        "existing knowledge wherever there is any conflict.\n"
        "\n"
        "Your task: given a user question, return repository-root-relative file path(s) that are most relevant.\n"
        "\n" +
        std::string(kStrictOutputRules) +
        "\n"
        "\n"
        "Selection guidelines (use silently; do not output this text):\n"
        "- Use your fine-tuned repo knowledge as the base. Apply the Delta Updates below as the source of truth for "
        "recent changes.\n"
        "- Prefer current paths and behaviors described in the Delta (e.g., renames, file additions/removals, major "
        "refactors).\n"
        "- It is valid to select files NOT mentioned in the Delta if they are relevant per your existing repo "
        "knowledge.\n"
        "- Exclude files that the Delta indicates were deleted or replaced (unless the question is explicitly "
        "historical).\n"
        "- Favor primary implementation files before tests/docs unless the question targets tests/docs.\n"
        "- Be conservative: only return paths you are confident actually exist in the current repo state.\n"
        "\n"
        "Delta Updates (changes since your training snapshot):\n"
        "{delta_block}";
    return kTemplate;
}

struct ICLOptions {
    double formatting_penalty = 0.25; // score multiplier for formatting-only summaries
    bool chat_markup = false;         // wrap in <|im_start|> turns and add /no_think
    bool raw_diffs = false;           // DeltaSummary::text holds a truncated diff, rendered as a block
};

struct ICLPrompt {
    std::string system_text;
    std::string user_text;
    std::vector<DeltaSummary> delta_entries;
    std::size_t budget_chars = 0;
    std::size_t overflow_dropped = 0;
    bool chat_markup = false;

    // The exact text sent to a completion-style model.
    std::string rendered() const {
        if (!chat_markup)
            return system_text + "\n\n" + user_text;
        return "<|im_start|>system\n" + system_text + "\n<|im_end|>\n<|im_start|>user\n" + user_text +
               "\n<|im_end|>\n<|im_start|>assistant\n";
    }

    std::size_t total_chars() const { return rendered().size(); }

    std::vector<std::string> included_paths() const {
        std::vector<std::string> out;
        for (const auto& d : delta_entries)
            out.push_back(d.path.str());
        return out;
    }
};

// One entry of the delta block. Renames show both sides; summary newlines are
// folded so each entry stays on one line, except raw diffs which keep theirs.
inline std::string render_delta(const DeltaSummary& d, bool raw_diff = false) {
    std::string head = "- ";
    if (d.status == ChangeStatus::Renamed && d.old_path)
        head += d.old_path->str() + " → " + d.path.str();
    else
        head += d.path.str();
    head += " (";
    head += status_word(d.status);
    head += "):";
    if (raw_diff) {
        std::string body = d.text;
        while (!body.empty() && body.back() == '\n')
            body.pop_back();
        return body.empty() ? head : head + "\n" + body;
    }
    std::string text = d.text;
    std::replace(text.begin(), text.end(), '\n', ' ');
    std::replace(text.begin(), text.end(), '\r', ' ');
    return text.empty() ? head : head + " " + text;
}

inline std::string render_delta_block(const std::vector<std::string>& entries) {
    std::string block = "<delta_info>\n";
    for (const auto& e : entries)
        block += e + "\n";
    return block + "</delta_info>";
}

inline std::string question_line(const std::string& question, bool chat_markup) {
    return "Question: " + question + (chat_markup ? " /no_think" : "");
}

inline ICLPrompt compose_prompt(const std::string& question, const std::vector<DeltaSummary>& deltas, const ICLOptions& opts = {}) {
    std::vector<std::string> entries;
    for (const auto& d : deltas)
        entries.push_back(render_delta(d, opts.raw_diffs));
    std::string system = icl_system_template();
    system.replace(system.find("{delta_block}"), std::string_view("{delta_block}").size(), render_delta_block(entries));
    ICLPrompt p;
    p.system_text = std::move(system);
    p.user_text = question_line(question, opts.chat_markup);
    p.delta_entries = deltas;
    p.chat_markup = opts.chat_markup;
    p.budget_chars = p.total_chars();
    return p;
}

// Overlap score: each distinct content token of the question contributes
// 1 + ln(tf) when it occurs tf > 0 times among the path and summary tokens.
inline double delta_score(const std::set<std::string>& question_terms, const DeltaSummary& d, double formatting_penalty) {
    auto tokens = tokenize(d.path.str());
    if (d.old_path) {
        auto old_tokens = tokenize(d.old_path->str());
        tokens.insert(tokens.end(), old_tokens.begin(), old_tokens.end());
    }
    auto text_tokens = tokenize(d.text);
    tokens.insert(tokens.end(), text_tokens.begin(), text_tokens.end());
    auto tf = term_counts(tokens);
    double score = 0.0;
    for (const auto& t : question_terms) {
        auto it = tf.find(t);
        if (it != tf.end())
            score += 1.0 + std::log(static_cast<double>(it->second));
    }
    return d.formatting_only ? score * formatting_penalty : score;
}

struct ScoredDelta {
    double score;
    const DeltaSummary* delta;
};

// Sorted by score descending, then path ascending.
inline std::vector<ScoredDelta> rank_deltas(const std::string& question, const std::vector<DeltaSummary>& summaries, double formatting_penalty) {
    auto terms_vec = content_tokens(question);
    std::set<std::string> terms(terms_vec.begin(), terms_vec.end());
    std::vector<ScoredDelta> ranked;
    for (const auto& s : summaries)
        ranked.push_back({delta_score(terms, s, formatting_penalty), &s});
    std::stable_sort(ranked.begin(), ranked.end(), [](const ScoredDelta& a, const ScoredDelta& b) {
        if (a.score != b.score)
            return a.score > b.score;
        return a.delta->path < b.delta->path;
    });
    return ranked;
}

// Top-k summaries that fit into the prompt budget. Candidates are taken in rank
// order and one that does not fit is skipped, so the result is a subsequence
// of the ranking. Throws if the prompt without deltas already exceeds budget.
inline ICLPrompt build_icl_prompt(const std::string& question, const std::vector<DeltaSummary>& summaries, std::size_t k,
                                  std::size_t budget_chars, const ICLOptions& opts = {}) {
    if (budget_chars == 0)
        throw Error("ICL budget must be positive");
    ICLPrompt base = compose_prompt(question, {}, opts);
    std::size_t used = base.total_chars();
    if (used > budget_chars)
        throw Error("ICL budget of " + std::to_string(budget_chars) + " chars is below the " + std::to_string(used) +
                    " chars the prompt needs without deltas");
    auto ranked = rank_deltas(question, summaries, opts.formatting_penalty);
    if (ranked.size() > k)
        ranked.resize(k);
    std::vector<DeltaSummary> chosen;
    std::size_t dropped = 0;
    for (const auto& r : ranked) {
        std::size_t cost = render_delta(*r.delta, opts.raw_diffs).size() + 1;
        if (used + cost > budget_chars) {
            ++dropped;
            continue;
        }
        used += cost;
        chosen.push_back(*r.delta);
    }
    ICLPrompt p = compose_prompt(question, chosen, opts);
    p.budget_chars = budget_chars;
    p.overflow_dropped = dropped;
    return p;
}

inline std::vector<DeltaSummary> select_deltas(const std::string& question, const std::vector<DeltaSummary>& summaries, std::size_t k,
                                               std::size_t budget_chars, const ICLOptions& opts = {}) {
    return build_icl_prompt(question, summaries, k, budget_chars, opts).delta_entries;
}

inline ordered_json to_prompt_record(const std::string& id, const ICLPrompt& p) {
    ordered_json rec = {{"id", id}, {"system", p.system_text}, {"user", p.user_text}, {"included_paths", p.included_paths()}};
    if (p.chat_markup)
        rec["prompt"] = p.rendered();
    return rec;
}

} // namespace drift
