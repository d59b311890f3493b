#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "drift/alias.hpp"
#include "drift/diff.hpp"
#include "drift/hash.hpp"
#include "drift/llm.hpp"
#include "drift/manifest.hpp"
#include "drift/parallel.hpp"
#include "drift/summarize.hpp"
#include "drift/text.hpp"

namespace drift {

enum class Origin { New, Old };
enum class SynthMode { GitDiff, FullFile, Base };

inline const char* to_string(Origin o) { return o == Origin::New ? "NEW" : "OLD"; }

inline const char* to_string(SynthMode m) {
    switch (m) {
    case SynthMode::GitDiff: return "git-diff";
    case SynthMode::FullFile: return "full-file";
    case SynthMode::Base: return "base";
    }
    return "base";
}

inline SynthMode parse_synth_mode(const std::string& s) {
    if (s == "git-diff")
        return SynthMode::GitDiff;
    if (s == "full-file")
        return SynthMode::FullFile;
    if (s == "base")
        return SynthMode::Base;
    throw Error("unknown dataset mode '" + s + "'");
}

using PathSet = std::set<NormalizedPath>;

// Stable dedup key: content hash of the question and its sorted gold set.
inline std::string example_id(const std::string& question, const PathSet& gold) {
    std::string material = question;
    material += '\0';
    for (const auto& p : gold) {
        material += p.str();
        material += '\n';
    }
    return sha256_hex(material).substr(0, 16);
}

struct QAExample {
    std::string id;
    std::string question;
    PathSet gold_paths;
    Origin origin = Origin::New;
    SynthMode mode = SynthMode::GitDiff;
    std::optional<NormalizedPath> anchor_path;

    static QAExample make(std::string question, PathSet gold, Origin origin, SynthMode mode,
                          std::optional<NormalizedPath> anchor = std::nullopt) {
        QAExample ex{example_id(question, gold), std::move(question), std::move(gold), origin, mode, std::move(anchor)};
        return ex;
    }

    friend bool operator==(const QAExample&, const QAExample&) = default;
};

inline ordered_json to_training_record(const QAExample& ex) {
    ordered_json paths = ordered_json::array();
    for (const auto& p : ex.gold_paths)
        paths.push_back(p.str());
    return {{"id", ex.id}, {"question", ex.question}, {"relevant_file_paths", paths}, {"origin", to_string(ex.origin)},
            {"mode", to_string(ex.mode)}};
}

// Reads a pool record. Gold may be under "relevant_file_paths" or "gold_paths";
// a missing id is derived from the content.
template <typename Json>
QAExample example_from_json(const Json& j, Origin default_origin = Origin::Old, SynthMode default_mode = SynthMode::Base) {
    if (!j.contains("question") || !j["question"].is_string())
        throw Error("pool record lacks a string 'question'");
    const char* key = j.contains("relevant_file_paths") ? "relevant_file_paths" : "gold_paths";
    if (!j.contains(key) || !j[key].is_array())
        throw Error("pool record lacks 'relevant_file_paths' / 'gold_paths'");
    PathSet gold;
    for (const auto& p : j[key]) {
        if (!p.is_string())
            throw Error("pool record has a non-string path");
        auto raw = p.template get<std::string>();
        auto np = normalize_path(raw);
        if (!np)
            throw Error("pool record has an invalid path '" + raw + "'");
        gold.insert(*np);
    }
    if (gold.empty())
        throw Error("pool record has an empty gold set");
    QAExample ex = QAExample::make(j["question"].template get<std::string>(), std::move(gold), default_origin, default_mode);
    if (j.contains("id") && j["id"].is_string())
        ex.id = j["id"].template get<std::string>();
    if (j.contains("origin") && j["origin"].is_string())
        ex.origin = j["origin"] == "NEW" ? Origin::New : Origin::Old;
    if (j.contains("mode") && j["mode"].is_string())
        ex.mode = parse_synth_mode(j["mode"].template get<std::string>());
    return ex;
}

inline constexpr std::string_view kDiffSynthesisPrompt =
    "You are given:\n"
    "- The repository-relative file path that changed (pre/post as relevant)\n"
    "- A concise English summary describing how that file changed (derived from a git diff)\n"
    "\n"
    "Your task:\n"
    "- Propose up to {target} specific developer questions about the change in this file.\n"
    "- Each question must include at least one changed symbol (function/class/param/constant) in backticks.\n"
    "- Each item must include a minimal list (1-`{max_files_per_q}`) of repository-root-relative paths relevant to "
    "answering it.\n"
    "- Output ONLY this JSON shape (no extra keys, no prose):\n"
    "{\n"
    "  \"samples\": [\n"
    "    {\n"
    "      \"question\": \"Developer question here with at least one `ChangedSymbol`\",\n"
    "      \"relevant_file_paths\": [\"file1.py\", \"dir/file2.py\"]\n"
    "    }\n"
    "  ]\n"
    "}\n"
    "\n"
    "Constraints:\n"
    "- Focus strictly on the described changes (not the whole repo).\n"
    "- Use repo-root-relative UNIX paths that actually exist.\n"
    "- No file names or paths in the *question* text (symbols OK).";

inline constexpr std::string_view kFileSynthesisPrompt =
    "You are a senior software engineer analyzing a codebase.\n"
    "\n"
    "Given:\n"
    "1) The repository-root-relative path of the current file\n"
    "2) The entire contents of the current file\n"
    "\n"
    "Your task:\n"
    "- Generate up to {max_per_file} realistic, high-quality developer questions.\n"
    "- Each question should require understanding the current file (and other files when natural).\n"
    "- For each question, output ONLY the minimal set of file paths (1-{max_files_per_q}) that are relevant.\n"
    "- Paths MUST be repo-root-relative, use \"/\", exist, be sorted & unique.\n"
    "\n"
    "Return ONLY:\n"
    "{\n"
    "  \"samples\": [\n"
    "    {\"question\": \"Developer question here\", \"relevant_file_paths\": [\"file1.ext\"]}\n"
    "  ]\n"
    "}\n"
    "(No prose.)";

inline std::string fill_placeholders(std::string_view tmpl, const std::map<std::string, std::string>& values) {
    std::string out(tmpl);
    for (const auto& [key, value] : values) {
        std::string needle = "{" + key + "}";
        for (auto pos = out.find(needle); pos != std::string::npos; pos = out.find(needle, pos + value.size()))
            out.replace(pos, needle.size(), value);
    }
    return out;
}

struct SynthStats {
    std::size_t files = 0;
    std::size_t malformed_replies = 0;
    std::size_t skipped_files = 0;
    std::size_t dropped_path_count = 0; // outside 1..max_files_per_q
    std::size_t dropped_no_symbol = 0;
    std::size_t dropped_path_in_question = 0;
    std::size_t dropped_invalid_path = 0;

    SynthStats& operator+=(const SynthStats& o) {
        files += o.files;
        malformed_replies += o.malformed_replies;
        skipped_files += o.skipped_files;
        dropped_path_count += o.dropped_path_count;
        dropped_no_symbol += o.dropped_no_symbol;
        dropped_path_in_question += o.dropped_path_in_question;
        dropped_invalid_path += o.dropped_invalid_path;
        return *this;
    }

    ordered_json to_json() const {
        return {{"files", files},
                {"malformed_replies", malformed_replies},
                {"skipped_files", skipped_files},
                {"dropped_path_count", dropped_path_count},
                {"dropped_no_symbol", dropped_no_symbol},
                {"dropped_path_in_question", dropped_path_in_question},
                {"dropped_invalid_path", dropped_invalid_path}};
    }
};

struct SynthResult {
    std::vector<QAExample> examples;
    SynthStats stats;
};

namespace detail {

// Asks the service (one retry on a malformed reply) and turns the samples into
// examples; returns nothing and counts a skipped file if both replies are unusable.
inline SynthResult synth_via_service(ChatBackend& service, const ChatRequest& request, const NormalizedPath& anchor,
                                     std::size_t cap, int max_files_per_q, bool require_symbol, SynthMode mode) {
    SynthResult out;
    out.stats.files = 1;
    std::optional<nlohmann::json> reply;
    for (int attempt = 0; attempt < 2 && !reply; ++attempt) {
        std::string text;
        try {
            text = service.complete(request);
        } catch (const ServiceError&) {
            ++out.stats.malformed_replies;
            continue;
        }
        auto j = extract_first_json(text, '{');
        if (j && j->contains("samples") && (*j)["samples"].is_array())
            reply = std::move(j);
        else
            ++out.stats.malformed_replies;
    }
    if (!reply) {
        ++out.stats.skipped_files;
        return out;
    }
    for (const auto& sample : (*reply)["samples"]) {
        if (out.examples.size() >= cap)
            break;
        if (!sample.is_object() || !sample.contains("question") || !sample["question"].is_string() ||
            !sample.contains("relevant_file_paths") || !sample["relevant_file_paths"].is_array()) {
            ++out.stats.malformed_replies;
            continue;
        }
        std::string question = sample["question"].get<std::string>();
        const auto& paths = sample["relevant_file_paths"];
        if (paths.empty() || paths.size() > static_cast<std::size_t>(max_files_per_q)) {
            ++out.stats.dropped_path_count;
            continue;
        }
        if (require_symbol && backticked(question).empty()) {
            ++out.stats.dropped_no_symbol;
            continue;
        }
        if (mentions_file_path(question)) {
            ++out.stats.dropped_path_in_question;
            continue;
        }
        PathSet gold;
        bool ok = true;
        for (const auto& p : paths) {
            auto np = p.is_string() ? normalize_path(p.get<std::string>()) : std::nullopt;
            if (!np) {
                ok = false;
                break;
            }
            gold.insert(*np);
        }
        if (!ok) {
            ++out.stats.dropped_invalid_path;
            continue;
        }
        out.examples.push_back(QAExample::make(std::move(question), std::move(gold), Origin::New, mode, anchor));
    }
    return out;
}

} // namespace detail

// NEW examples anchored on one M/A file's delta summary. Without a service the
// output is one templated question per symbol named in the summary.
inline SynthResult synth_new_from_diff(const DeltaSummary& summary, int target, int max_files_per_q,
                                       ChatBackend* service = nullptr) {
    if (summary.status != ChangeStatus::Modified && summary.status != ChangeStatus::Added)
        throw Error("synth_new_from_diff: '" + summary.path.str() + "' is not a modified or added file");
    SynthResult out;
    if (target <= 0)
        return out;
    if (service) {
        ChatRequest req;
        req.temperature = 0.2;
        req.messages.push_back({"system", fill_placeholders(kDiffSynthesisPrompt, {{"target", std::to_string(target)},
                                                                                   {"max_files_per_q", std::to_string(max_files_per_q)}})});
        req.messages.push_back({"user", "- path: " + summary.path.str() + "\n- summary: " + summary.text});
        return detail::synth_via_service(*service, req, summary.path, static_cast<std::size_t>(target), max_files_per_q, true,
                                         SynthMode::GitDiff);
    }
    out.stats.files = 1;
    std::vector<std::string> symbols = summary.symbols.empty() ? backticked(summary.text) : summary.symbols;
    for (const auto& sym : symbols) {
        if (out.examples.size() >= static_cast<std::size_t>(target))
            break;
        out.examples.push_back(QAExample::make("What changed in the behavior of `" + sym + "` in this window?", {summary.path},
                                               Origin::New, SynthMode::GitDiff, summary.path));
    }
    return out;
}

// NEW examples conditioned on a file's full content at Y. Offline, one question
// per top-level definition.
inline SynthResult synth_new_from_file(const NormalizedPath& path, const std::string& content, int max_per_file,
                                       int max_files_per_q, ChatBackend* service = nullptr) {
    SynthResult out;
    if (max_per_file <= 0 || content.empty())
        return out;
    if (service) {
        ChatRequest req;
        req.temperature = 0.2;
        req.messages.push_back({"system", fill_placeholders(kFileSynthesisPrompt, {{"max_per_file", std::to_string(max_per_file)},
                                                                                   {"max_files_per_q", std::to_string(max_files_per_q)}})});
        req.messages.push_back({"user", "1) path: " + path.str() + "\n2) contents:\n```\n" + content + "\n```"});
        return detail::synth_via_service(*service, req, path, static_cast<std::size_t>(max_per_file), max_files_per_q, false,
                                         SynthMode::FullFile);
    }
    out.stats.files = 1;
    for (const auto& sym : top_level_definitions(content)) {
        if (out.examples.size() >= static_cast<std::size_t>(max_per_file))
            break;
        out.examples.push_back(QAExample::make("How does `" + sym + "` behave in the current version of the code?", {path},
                                               Origin::New, SynthMode::FullFile, path));
    }
    return out;
}

struct ValidationResult {
    std::vector<QAExample> kept;
    std::vector<ordered_json> log; // one record per rejection or remap
};

// Moves every label to its Y-side identity. Paths present at Y are kept as is;
// renamed paths are replaced; a deleted or unknown label rejects the example.
inline ValidationResult validate_labels(const std::vector<QAExample>& examples, const AliasMap& alias, const SnapshotIndex& snapshot) {
    ValidationResult out;
    for (const auto& ex : examples) {
        PathSet gold;
        std::optional<std::pair<std::string, std::string>> rejection; // reason, path
        std::vector<std::pair<std::string, std::string>> remaps;
        for (const auto& p : ex.gold_paths) {
            if (snapshot.contains(p)) {
                gold.insert(p);
                continue;
            }
            Resolution r = alias.resolve(p);
            if (r.kind == Resolution::Kind::Deleted) {
                rejection = {"deleted-label", p.str()};
                break;
            }
            if (r.kind == Resolution::Kind::Renamed && snapshot.contains(*r.path)) {
                remaps.emplace_back(p.str(), r.path->str());
                gold.insert(*r.path);
                continue;
            }
            rejection = {"not-in-snapshot", (r.path ? *r.path : p).str()};
            break;
        }
        if (!rejection && gold.empty())
            rejection = {"empty-gold", ""};
        if (rejection) {
            out.log.push_back({{"id", ex.id}, {"origin", to_string(ex.origin)}, {"action", "rejected"},
                               {"reason", rejection->first}, {"path", rejection->second}});
            continue;
        }
        QAExample kept = ex;
        if (!remaps.empty()) {
            kept.gold_paths = std::move(gold);
            kept.id = example_id(kept.question, kept.gold_paths);
            for (const auto& [from, to] : remaps)
                out.log.push_back({{"id", ex.id}, {"new_id", kept.id}, {"origin", to_string(ex.origin)}, {"action", "remapped"},
                                   {"reason", "alias-rename"}, {"path", from}, {"target", to}});
        }
        out.kept.push_back(std::move(kept));
    }
    return out;
}

// Keeps exactly the examples whose gold set avoids every changed path.
inline std::vector<QAExample> filter_old_pool(const std::vector<QAExample>& old_examples, const PathSet& changed) {
    std::vector<QAExample> out;
    for (const auto& ex : old_examples) {
        bool touches = std::any_of(ex.gold_paths.begin(), ex.gold_paths.end(), [&](const auto& p) { return changed.count(p) != 0; });
        if (!touches)
            out.push_back(ex);
    }
    return out;
}

struct MixRecipe {
    std::size_t new_count = 0;
    std::size_t old_count = 0;
    std::uint64_t seed = 0;
};

namespace detail {

// Unbiased draw from [0, n) using only the raw engine output, which the
// standard fixes for mt19937_64 (distribution objects are library-specific).
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    std::uint64_t threshold = (0 - n) % n;
    while (true) {
        std::uint64_t x = rng();
        if (x >= threshold)
            return x % n;
    }
}

inline std::vector<QAExample> canonical_pool(std::vector<QAExample> pool) {
    std::stable_sort(pool.begin(), pool.end(), [](const QAExample& a, const QAExample& b) { return a.id < b.id; });
    pool.erase(std::unique(pool.begin(), pool.end(), [](const QAExample& a, const QAExample& b) { return a.id == b.id; }),
               pool.end());
    return pool;
}

inline std::vector<QAExample> sample_without_replacement(std::vector<QAExample> pool, std::size_t k, std::mt19937_64& rng) {
    for (std::size_t i = 0; i < k; ++i)
        std::swap(pool[i], pool[i + bounded(rng, pool.size() - i)]);
    pool.resize(k);
    return pool;
}

} // namespace detail

// Draws exactly new_count NEW and old_count OLD examples and shuffles them.
// Pools are deduplicated by id and put in id order first, so the output is a
// pure function of the pool contents and the recipe.
inline std::vector<QAExample> mix(const std::vector<QAExample>& new_pool, const std::vector<QAExample>& old_pool, const MixRecipe& recipe) {
    auto news = detail::canonical_pool(new_pool);
    auto olds = detail::canonical_pool(old_pool);
    if (recipe.new_count > news.size())
        throw Error("mix: requested " + std::to_string(recipe.new_count) + " NEW examples but the NEW pool has " +
                    std::to_string(news.size()));
    if (recipe.old_count > olds.size())
        throw Error("mix: requested " + std::to_string(recipe.old_count) + " OLD examples but the OLD pool has " +
                    std::to_string(olds.size()));
    std::mt19937_64 rng(recipe.seed);
    auto out = detail::sample_without_replacement(std::move(news), recipe.new_count, rng);
    auto old_part = detail::sample_without_replacement(std::move(olds), recipe.old_count, rng);
    out.insert(out.end(), std::make_move_iterator(old_part.begin()), std::make_move_iterator(old_part.end()));
    for (std::size_t i = out.size(); i > 1; --i)
        std::swap(out[i - 1], out[detail::bounded(rng, i)]);
    return out;
}

struct ForgeOptions {
    SynthMode mode = SynthMode::GitDiff;
    int target = 5;          // questions per diff summary
    int max_per_file = 5;    // questions per full file
    int max_files_per_q = 3;
    ChatBackend* service = nullptr;
    MixRecipe recipe;
    std::size_t workers = 4;
};

struct ForgeResult {
    std::vector<QAExample> training;
    std::vector<QAExample> new_pool;
    std::vector<QAExample> old_pool;
    std::vector<ordered_json> log;
    SynthStats stats;
};

// NEW pool from M/A anchors, blocklisted and validated OLD pool, then the mix.
// `contents` maps Y-side paths to file text and is used in full-file mode.
inline ForgeResult forge_dataset(const ChangeManifest& manifest, const std::vector<DeltaSummary>& summaries,
                                 const std::map<std::string, std::string>& contents, const SnapshotIndex& snapshot,
                                 const std::vector<QAExample>& old_examples, const ForgeOptions& opts) {
    ForgeResult out;
    std::vector<NormalizedPath> anchors = manifest.mods;
    anchors.insert(anchors.end(), manifest.adds.begin(), manifest.adds.end());
    std::sort(anchors.begin(), anchors.end());

    std::map<NormalizedPath, const DeltaSummary*> by_path;
    for (const auto& s : summaries)
        by_path[s.path] = &s;

    auto results = parallel_map(anchors, opts.workers, [&](const NormalizedPath& anchor) -> SynthResult {
        if (opts.mode == SynthMode::FullFile) {
            auto it = contents.find(anchor.str());
            if (it == contents.end())
                return {};
            return synth_new_from_file(anchor, it->second, opts.max_per_file, opts.max_files_per_q, opts.service);
        }
        auto it = by_path.find(anchor);
        if (it == by_path.end())
            return {};
        return synth_new_from_diff(*it->second, opts.target, opts.max_files_per_q, opts.service);
    });

    std::vector<QAExample> synthesized;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        if (results[i].stats.files == 0)
            out.log.push_back({{"action", "skipped"}, {"reason", opts.mode == SynthMode::FullFile ? "no-content" : "no-summary"},
                               {"path", anchors[i].str()}});
        out.stats += results[i].stats;
        for (auto& ex : results[i].examples)
            synthesized.push_back(std::move(ex));
    }

    auto new_checked = validate_labels(synthesized, manifest.alias_map, snapshot);
    out.new_pool = detail::canonical_pool(std::move(new_checked.kept));
    out.log.insert(out.log.end(), new_checked.log.begin(), new_checked.log.end());

    auto changed = manifest.changed_paths();
    auto unblocked = filter_old_pool(old_examples, changed);
    for (const auto& ex : old_examples)
        if (std::find(unblocked.begin(), unblocked.end(), ex) == unblocked.end())
            out.log.push_back({{"id", ex.id}, {"origin", "OLD"}, {"action", "rejected"}, {"reason", "blocklisted"}});
    auto old_checked = validate_labels(unblocked, manifest.alias_map, snapshot);
    out.old_pool = detail::canonical_pool(std::move(old_checked.kept));
    for (auto& ex : out.old_pool)
        ex.origin = Origin::Old;
    out.log.insert(out.log.end(), old_checked.log.begin(), old_checked.log.end());

    out.training = mix(out.new_pool, out.old_pool, opts.recipe);

    auto deleted = manifest.alias_map.deleted_set();
    for (const auto& ex : out.training)
        for (const auto& p : ex.gold_paths)
            if (deleted.count(p) || !snapshot.contains(p))
                throw Error("internal: emitted label '" + p.str() + "' is deleted or outside the snapshot");
    return out;
}

} // namespace drift
