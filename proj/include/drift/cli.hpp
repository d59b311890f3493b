#pragma once

#include <cstdint>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"

#include "drift/dataset.hpp"
#include "drift/eval.hpp"
#include "drift/harness.hpp"
#include "drift/hash.hpp"
#include "drift/icl.hpp"
#include "drift/io.hpp"
#include "drift/llm_http.hpp"
#include "drift/manifest.hpp"
#include "drift/report.hpp"
#include "drift/summarize.hpp"
#include "drift/window.hpp"

namespace drift::cli {

inline constexpr const char* kVersion = "0.1.0";

inline spdlog::logger& log() {
    static std::shared_ptr<spdlog::logger> logger = [] {
        auto existing = spdlog::get("drift");
        return existing ? existing : spdlog::stderr_color_mt("drift");
    }();
    return *logger;
}

inline fs::path sibling(const fs::path& p, const std::string& suffix) {
    fs::path out = p;
    out += suffix;
    return out;
}

inline fs::path default_capture_dir(const fs::path& bundle) { return sibling(bundle, ".capture"); }

// SHA-256 of a file, or of the sorted "<relpath> <sha>" listing for a directory.
inline std::string hash_input(const fs::path& p) {
    if (!fs::is_directory(p))
        return sha256_hex(read_text_file(p));
    std::vector<std::string> lines;
    for (auto it = fs::recursive_directory_iterator(p); it != fs::recursive_directory_iterator(); ++it) {
        if (it->is_directory() && it->path().filename() == ".git") {
            it.disable_recursion_pending();
            continue;
        }
        if (it->is_regular_file())
            lines.push_back(fs::relative(it->path(), p).generic_string() + " " + sha256_hex(read_text_file(it->path())));
    }
    std::sort(lines.begin(), lines.end());
    std::string listing;
    for (const auto& l : lines)
        listing += l + "\n";
    return sha256_hex(listing);
}

// Records what an artifact was built from and writes it with a .meta.json sidecar.
class Provenance {
public:
    Provenance(std::string command, ordered_json effective_config)
        : command_(std::move(command)), config_(std::move(effective_config)) {}

    void input(const fs::path& p) { inputs_[p.generic_string()] = hash_input(p); }
    void input_value(const std::string& name, const std::string& digest) { inputs_[name] = digest; }
    void extra(const std::string& key, ordered_json value) { extra_[key] = std::move(value); }

    ordered_json meta() const {
        ordered_json j;
        j["tool"] = "drift";
        j["version"] = kVersion;
        j["command"] = command_;
        j["config_hash"] = sha256_hex(config_.dump());
        j["effective_config"] = config_;
        j["inputs"] = inputs_;
        for (auto it = extra_.begin(); it != extra_.end(); ++it)
            j[it.key()] = it.value();
        return j;
    }

    void write(const fs::path& artifact, std::string_view content) const {
        write_file_atomic(artifact, content);
        write_file_atomic(sibling(artifact, ".meta.json"), to_pretty_json(meta()));
        log().info("wrote {}", artifact.string());
    }

private:
    std::string command_;
    ordered_json config_;
    std::map<std::string, std::string> inputs_;
    ordered_json extra_ = ordered_json::object();
};

struct Globals {
    std::uint64_t seed = 0;
    std::string log_level = "info";
};

// Every option of a subcommand with its effective value, in declaration order.
inline ordered_json effective_config(const CLI::App& sub, const Globals& g) {
    ordered_json j;
    j["seed"] = g.seed;
    for (const CLI::Option* o : sub.get_options()) {
        if (o == sub.get_help_ptr())
            continue;
        const std::string& key = o->get_single_name();
        if (o->get_expected_max() == 0) {
            j[key] = o->count() > 0;
            continue;
        }
        auto res = o->count() ? o->reduced_results() : std::vector<std::string>{};
        if (res.empty()) {
            auto def = o->get_default_str();
            j[key] = def.empty() ? ordered_json(nullptr) : ordered_json(def);
        } else if (res.size() == 1 && o->get_expected_max() <= 1) {
            j[key] = res.front();
        } else {
            j[key] = res;
        }
    }
    return j;
}

inline SnapshotIndex load_snapshot(const std::string& given, const fs::path& bundle, Provenance& prov) {
    fs::path source = given;
    if (source.empty()) {
        if (bundle.empty())
            throw Error("--snapshot is required when no bundle capture is available");
        source = default_capture_dir(bundle) / "snapshot.txt";
        if (!fs::exists(source))
            throw Error("--snapshot not given and no captured listing at " + source.string());
    }
    prov.input(source);
    return SnapshotIndex::load(source);
}

inline WindowCapture load_bundle_capture(const std::string& given, const fs::path& bundle, Provenance& prov) {
    fs::path dir = given.empty() ? default_capture_dir(bundle) : fs::path(given);
    prov.input(dir);
    return load_capture(dir);
}

inline ChangeManifest load_bundle(const fs::path& bundle, Provenance& prov) {
    prov.input(bundle);
    return load_manifest(bundle);
}

inline std::unique_ptr<HttpChatClient> make_service(const std::string& cache_dir) {
    ServiceConfig cfg = ServiceConfig::from_env();
    cfg.cache_dir = cache_dir;
    return std::make_unique<HttpChatClient>(cfg);
}

// Contents of snapshot paths that exist under `root`.
inline std::map<std::string, std::string> read_contents(const fs::path& root, const SnapshotIndex& snapshot) {
    std::map<std::string, std::string> out;
    for (const auto& p : snapshot.paths()) {
        fs::path f = root / p.str();
        if (fs::is_regular_file(f))
            out[p.str()] = read_text_file(f);
    }
    return out;
}

inline std::string jsonl_of(const std::vector<ordered_json>& records) { return to_jsonl(records); }

// ---- subcommands ----------------------------------------------------------

struct WindowArgs {
    std::string repo, base, head, offline, out, capture;
    std::vector<std::string> globs = default_code_globs();
    bool include_deletes = false;
    std::size_t workers = 4;
};

inline int cmd_window(const WindowArgs& a, Provenance prov) {
    WindowCapture cap;
    fs::path capture_dir = a.capture.empty() ? default_capture_dir(a.out) : fs::path(a.capture);
    if (!a.offline.empty()) {
        prov.input(a.offline);
        cap = load_capture(a.offline);
        if (cap.base_sha.empty())
            cap.base_ref = cap.base_sha = a.base;
        if (cap.head_sha.empty())
            cap.head_ref = cap.head_sha = a.head;
    } else {
        if (a.repo.empty() || a.base.empty() || a.head.empty())
            throw CLI::RequiredError("--repo, --base and --head (or --offline)");
        cap = capture_window({a.repo, a.base, a.head, a.globs}, {a.include_deletes, a.workers});
        prov.input_value("git:" + a.base, cap.base_sha);
        prov.input_value("git:" + a.head, cap.head_sha);
    }
    ChangeManifest m = manifest_from_capture(cap);
    if (a.offline.empty() || fs::weakly_canonical(a.offline) != fs::weakly_canonical(capture_dir))
        save_capture(cap, capture_dir);
    prov.extra("counts", {{"adds", m.adds.size()}, {"mods", m.mods.size()}, {"deletes", m.deletes.size()}, {"renames", m.renames.size()}});
    prov.write(a.out, serialize_manifest(m));
    return 0;
}

struct SummarizeArgs {
    std::string bundle, backend = "heuristic", cache, capture, out;
    std::size_t max_diff_chars = kDefaultMaxDiffChars;
    std::size_t workers = 4;
};

inline int cmd_summarize(const SummarizeArgs& a, Provenance prov) {
    ChangeManifest m = load_bundle(a.bundle, prov);
    WindowCapture cap = load_bundle_capture(a.capture, a.bundle, prov);
    std::unique_ptr<HttpChatClient> service;
    if (a.backend == "service")
        service = make_service(a.cache);
    SummarizeOptions opts{service.get(), a.max_diff_chars, a.workers};
    auto summaries = summarize_manifest(
        m,
        [&](const ChangeEntry& e) {
            auto it = cap.patches.find(e.path.str());
            if (it == cap.patches.end()) {
                log().warn("no captured diff for {}; summarizing as empty", e.path.str());
                return std::string();
            }
            return it->second;
        },
        opts);
    std::size_t fallbacks = 0;
    for (const auto& s : summaries)
        fallbacks += service && s.backend == SummaryBackend::Heuristic;
    if (fallbacks)
        log().warn("{} summaries fell back to the heuristic backend", fallbacks);
    prov.extra("heuristic_fallbacks", fallbacks);
    prov.write(a.out.empty() ? fs::path(a.bundle) : fs::path(a.out), serialize_manifest(m));
    return 0;
}

struct DatasetArgs {
    std::string bundle, mode = "git-diff", snapshot, old_pool, backend = "offline", out, reject_log, capture, cache;
    std::size_t new_count = 0, old_count = 0;
    int target = 5, max_per_file = 5, max_files_per_q = 3;
    std::size_t workers = 4;
};

inline int cmd_dataset(const DatasetArgs& a, const Globals& g, Provenance prov) {
    ChangeManifest m = load_bundle(a.bundle, prov);
    SnapshotIndex snapshot = load_snapshot(a.snapshot, a.bundle, prov);
    SynthMode mode = parse_synth_mode(a.mode);
    if (mode == SynthMode::Base)
        throw Error("dataset --mode must be git-diff or full-file");

    std::vector<DeltaSummary> summaries;
    std::map<std::string, std::string> contents;
    if (mode == SynthMode::GitDiff) {
        summaries = summaries_from_manifest(m);
        if (summaries.empty() && !m.changes.empty())
            throw Error("bundle has no summaries; run `drift summarize` first");
    } else {
        contents = load_bundle_capture(a.capture, a.bundle, prov).files;
    }

    std::vector<QAExample> old_examples;
    if (!a.old_pool.empty()) {
        prov.input(a.old_pool);
        std::size_t lineno = 0;
        for (const auto& j : read_jsonl(a.old_pool)) {
            ++lineno;
            try {
                old_examples.push_back(example_from_json(j, Origin::Old, SynthMode::Base));
            } catch (const Error& e) {
                throw Error(a.old_pool + ":" + std::to_string(lineno) + ": " + e.what());
            }
        }
    }

    std::unique_ptr<HttpChatClient> service;
    if (a.backend == "service")
        service = make_service(a.cache);

    ForgeOptions opts;
    opts.mode = mode;
    opts.target = a.target;
    opts.max_per_file = a.max_per_file;
    opts.max_files_per_q = a.max_files_per_q;
    opts.service = service.get();
    opts.recipe = {a.new_count, a.old_count, g.seed};
    opts.workers = a.workers;
    ForgeResult r = forge_dataset(m, summaries, contents, snapshot, old_examples, opts);

    std::vector<ordered_json> records;
    for (const auto& ex : r.training)
        records.push_back(to_training_record(ex));
    prov.extra("pools", {{"new", r.new_pool.size()}, {"old", r.old_pool.size()}});
    prov.extra("synthesis", r.stats.to_json());
    if (!a.reject_log.empty())
        prov.write(a.reject_log, jsonl_of(r.log));
    prov.write(a.out, jsonl_of(records));
    return 0;
}

struct IclArgs {
    std::string bundle, question, questions, out, capture;
    std::size_t k = 8, budget = 16000, max_diff_chars = 4000;
    double formatting_penalty = 0.25;
    bool raw_diffs = false, chat_markup = false;
};

inline int cmd_icl(const IclArgs& a, Provenance prov) {
    ChangeManifest m = load_bundle(a.bundle, prov);
    std::vector<DeltaSummary> deltas;
    if (a.raw_diffs) {
        WindowCapture cap = load_bundle_capture(a.capture, a.bundle, prov);
        std::map<std::string, bool> formatting;
        for (const auto& s : summaries_from_manifest(m))
            formatting[s.path.str()] = s.formatting_only;
        for (const auto& c : m.changes) {
            auto it = cap.patches.find(c.path.str());
            std::string diff = it == cap.patches.end() ? std::string() : truncate_diff(it->second, a.max_diff_chars);
            deltas.push_back({c.path, c.old_path, c.status, diff, 0, formatting[c.path.str()], SummaryBackend::Heuristic, {}});
        }
    } else {
        deltas = summaries_from_manifest(m);
    }

    std::vector<QuestionItem> questions;
    if (!a.question.empty())
        questions.push_back({"q0", a.question});
    if (!a.questions.empty()) {
        prov.input(a.questions);
        auto more = read_questions(a.questions);
        questions.insert(questions.end(), more.begin(), more.end());
    }
    if (questions.empty())
        throw CLI::RequiredError("--question or --questions");

    ICLOptions opts{a.formatting_penalty, a.chat_markup, a.raw_diffs};
    std::vector<ordered_json> records;
    std::size_t dropped = 0;
    for (const auto& q : questions) {
        ICLPrompt p = build_icl_prompt(q.question, deltas, a.k, a.budget, opts);
        dropped += p.overflow_dropped;
        records.push_back(to_prompt_record(q.id, p));
    }
    prov.extra("overflow_dropped", dropped);
    prov.write(a.out, jsonl_of(records));
    return 0;
}

struct EvalArgs {
    std::string bundle, snapshot, gold, pred, report, records;
    bool no_remap = false, no_rescue = false;
    std::size_t workers = 4;
};

inline int cmd_eval(const EvalArgs& a, Provenance prov) {
    ChangeManifest m = load_bundle(a.bundle, prov);
    SnapshotIndex snapshot = load_snapshot(a.snapshot, a.bundle, prov);
    prov.input(a.gold);
    prov.input(a.pred);
    auto gold = read_gold(a.gold);
    auto preds = read_predictions(a.pred);
    RemapOptions opts{!a.no_remap, !a.no_rescue};
    auto records = evaluate(gold, preds, m.alias_map, snapshot, m.modified_or_added(), opts, a.workers);
    EvalReport report = score_corpus(records);
    if (!a.records.empty()) {
        std::vector<ordered_json> rows;
        for (const auto& r : records)
            rows.push_back(to_json(r));
        prov.write(a.records, jsonl_of(rows));
    }
    prov.write(a.report, to_pretty_json(to_json(report)));
    log().info("EM {:.4f} MR {:.4f} over {} items", report.em(), report.mr(), report.n());
    return 0;
}

struct ProbeArgs {
    std::string bundle, snapshot, snapshot_x, gold, pred, report;
};

inline int cmd_probe(const ProbeArgs& a, Provenance prov) {
    ChangeManifest m = load_bundle(a.bundle, prov);
    SnapshotIndex snapshot = load_snapshot(a.snapshot, a.bundle, prov);
    std::optional<SnapshotIndex> x_side;
    if (!a.snapshot_x.empty()) {
        prov.input(a.snapshot_x);
        x_side = SnapshotIndex::load(a.snapshot_x);
    }
    prov.input(a.gold);
    prov.input(a.pred);
    ProbeReport r = probe_score(read_gold(a.gold), read_predictions(a.pred), m.alias_map, snapshot, x_side);
    prov.write(a.report, to_pretty_json(to_json(r)));
    log().info("emission rate {:.4f}, old EM {:.4f}", r.emission_rate, r.old_em);
    return 0;
}

struct AnswerArgs {
    std::string adapter = "lexical", bundle, snapshot, questions, prompts, replay, contents, out, cache;
    std::size_t top_k = 3;
    double min_score = 0.15;
    std::size_t workers = 4;
};

inline int cmd_answer(const AnswerArgs& a, Provenance prov) {
    if (a.questions.empty() && a.prompts.empty())
        throw CLI::RequiredError("--questions or --prompts");
    std::vector<QuestionItem> questions;
    std::map<std::string, ICLPrompt> prompts;
    if (!a.questions.empty()) {
        prov.input(a.questions);
        questions = read_questions(a.questions);
    }
    if (!a.prompts.empty()) {
        prov.input(a.prompts);
        for (const auto& j : read_jsonl(a.prompts)) {
            ICLPrompt p;
            p.system_text = j.at("system").get<std::string>();
            p.user_text = j.at("user").get<std::string>();
            std::string id = j.at("id").get<std::string>();
            if (a.questions.empty()) {
                std::string q = p.user_text;
                if (q.rfind("Question: ", 0) == 0)
                    q = q.substr(10);
                questions.push_back({id, q});
            }
            prompts.emplace(id, std::move(p));
        }
    }

    std::unique_ptr<Adapter> adapter;
    std::unique_ptr<HttpChatClient> service;
    if (a.adapter == "replay") {
        if (a.replay.empty())
            throw CLI::RequiredError("--replay");
        prov.input(a.replay);
        adapter = std::make_unique<ReplayAdapter>(read_predictions(a.replay));
    } else if (a.adapter == "service") {
        service = make_service(a.cache);
        adapter = std::make_unique<ServiceAdapter>(*service);
    } else {
        fs::path bundle = a.bundle;
        SnapshotIndex snapshot = load_snapshot(a.snapshot, bundle, prov);
        std::optional<std::map<std::string, std::string>> contents;
        if (!a.contents.empty()) {
            prov.input(a.contents);
            contents = read_contents(a.contents, snapshot);
        }
        adapter = std::make_unique<LexicalAdapter>(std::move(snapshot), std::move(contents), LexicalOptions{a.top_k, a.min_score});
    }

    auto outputs = parallel_map(questions, a.adapter == "service" ? a.workers : 1, [&](const QuestionItem& q) {
        auto it = prompts.find(q.id);
        return adapter->answer(q, it == prompts.end() ? nullptr : &it->second);
    });
    std::vector<ordered_json> records;
    for (std::size_t i = 0; i < questions.size(); ++i)
        records.push_back(to_prediction_record(questions[i].id, outputs[i]));
    prov.write(a.out, jsonl_of(records));
    return 0;
}

struct ReportArgs {
    std::string report, base_report, format = "md", out, label = "variant", base_label = "base";
};

inline int cmd_report(const ReportArgs& a, Provenance prov) {
    prov.input(a.report);
    auto report = ordered_json::parse(read_text_file(a.report));
    std::optional<ordered_json> base;
    if (!a.base_report.empty()) {
        prov.input(a.base_report);
        base = ordered_json::parse(read_text_file(a.base_report));
    }
    std::string text = render_report(report, parse_report_format(a.format), base, {a.label, a.base_label});
    if (a.out.empty())
        std::cout << text;
    else
        prov.write(a.out, text);
    return 0;
}

// ---- entry point ----------------------------------------------------------

// 0 on success and --help, 1 on operational errors, 2 on usage errors.
inline int run(int argc, const char* const* argv) {
    CLI::App app{"Track repository drift across a commit window and score path-retrieval models against it.", "drift"};
    app.option_defaults()->always_capture_default();
    app.set_version_flag("--version", kVersion);
    app.set_config("--config", "", "Read options from an INI/TOML file; command-line flags take precedence");
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "Seed for every random choice");
    app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error or off")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}));

    WindowArgs wa;
    auto* window = app.add_subcommand("window", "Capture a commit window and write its change bundle");
    window->add_option("--repo", wa.repo, "Git working tree");
    window->add_option("--base", wa.base, "Base revision X");
    window->add_option("--head", wa.head, "Target revision Y");
    window->add_option("--glob", wa.globs, "Pathspec glob; repeatable");
    window->add_flag("--include-deletes", wa.include_deletes, "Also list deleted files");
    window->add_option("--offline", wa.offline, "Read a saved capture directory instead of running git")->check(CLI::ExistingDirectory);
    window->add_option("--capture", wa.capture, "Capture directory to write (default <out>.capture)");
    window->add_option("--workers", wa.workers, "Parallel git invocations");
    window->add_option("--out", wa.out, "Bundle JSON to write")->required();

    SummarizeArgs sa;
    auto* summarize = app.add_subcommand("summarize", "Describe every changed file of a bundle");
    summarize->add_option("--bundle", sa.bundle, "Bundle JSON")->required()->check(CLI::ExistingFile);
    summarize->add_option("--backend", sa.backend, "service or heuristic")->check(CLI::IsMember({"service", "heuristic"}));
    summarize->add_option("--max-diff-chars", sa.max_diff_chars, "Diff truncation cap")->check(CLI::PositiveNumber);
    summarize->add_option("--cache", sa.cache, "Service response cache directory");
    summarize->add_option("--capture", sa.capture, "Capture directory (default <bundle>.capture)");
    summarize->add_option("--workers", sa.workers, "Parallel summaries");
    summarize->add_option("--out", sa.out, "Output bundle (default: update --bundle in place)");

    DatasetArgs da;
    auto* dataset = app.add_subcommand("dataset", "Build an incremental training set from a window");
    dataset->add_option("--bundle", da.bundle, "Bundle JSON")->required()->check(CLI::ExistingFile);
    dataset->add_option("--mode", da.mode, "git-diff or full-file")->check(CLI::IsMember({"git-diff", "full-file"}));
    dataset->add_option("--snapshot", da.snapshot, "Y path listing or checked-out tree");
    dataset->add_option("--old-pool", da.old_pool, "Legacy examples (JSONL)")->check(CLI::ExistingFile);
    dataset->add_option("--new", da.new_count, "NEW examples to emit")->required();
    dataset->add_option("--old", da.old_count, "OLD examples to emit")->required();
    dataset->add_option("--backend", da.backend, "service or offline")->check(CLI::IsMember({"service", "offline"}));
    dataset->add_option("--target", da.target, "Questions per diff summary");
    dataset->add_option("--max-per-file", da.max_per_file, "Questions per file in full-file mode");
    dataset->add_option("--max-files-per-q", da.max_files_per_q, "Largest gold set per question")->check(CLI::PositiveNumber);
    dataset->add_option("--capture", da.capture, "Capture directory (default <bundle>.capture)");
    dataset->add_option("--cache", da.cache, "Service response cache directory");
    dataset->add_option("--workers", da.workers, "Parallel synthesis calls");
    dataset->add_option("--reject-log", da.reject_log, "Rejections and remaps (JSONL)");
    dataset->add_option("--out", da.out, "Training JSONL to write")->required();

    IclArgs ia;
    auto* icl = app.add_subcommand("icl", "Compose delta-aware prompts");
    icl->add_option("--bundle", ia.bundle, "Summarized bundle JSON")->required()->check(CLI::ExistingFile);
    icl->add_option("--question", ia.question, "A single question");
    icl->add_option("--questions", ia.questions, "Questions JSONL")->check(CLI::ExistingFile);
    icl->add_option("--k", ia.k, "Most deltas per prompt");
    icl->add_option("--budget", ia.budget, "Prompt budget in characters (about 4 per token)")->check(CLI::PositiveNumber);
    icl->add_option("--formatting-penalty", ia.formatting_penalty, "Score multiplier for formatting-only deltas");
    icl->add_flag("--raw-diffs", ia.raw_diffs, "Use truncated diffs instead of summaries");
    icl->add_option("--max-diff-chars", ia.max_diff_chars, "Truncation cap per raw diff")->check(CLI::PositiveNumber);
    icl->add_flag("--chat-markup", ia.chat_markup, "Emit <|im_start|> turns with /no_think");
    icl->add_option("--capture", ia.capture, "Capture directory (default <bundle>.capture)");
    icl->add_option("--out", ia.out, "Prompt JSONL to write")->required();

    EvalArgs ea;
    auto* eval = app.add_subcommand("eval", "Score predictions with alias-aware remapping");
    eval->add_option("--bundle", ea.bundle, "Bundle JSON")->required()->check(CLI::ExistingFile);
    eval->add_option("--snapshot", ea.snapshot, "Y path listing or tree (default <bundle>.capture/snapshot.txt)");
    eval->add_option("--gold", ea.gold, "Gold JSONL")->required()->check(CLI::ExistingFile);
    eval->add_option("--pred", ea.pred, "Prediction JSONL")->required()->check(CLI::ExistingFile);
    eval->add_flag("--no-remap", ea.no_remap, "Score predictions as emitted");
    eval->add_flag("--no-rescue", ea.no_rescue, "Skip rescue diagnostics");
    eval->add_option("--records", ea.records, "Per-instance JSONL to write");
    eval->add_option("--workers", ea.workers, "Parallel scoring");
    eval->add_option("--report", ea.report, "Report JSON to write")->required();

    ProbeArgs pa;
    auto* probe = app.add_subcommand("probe", "Count old-name emissions on structurally changed items");
    probe->add_option("--bundle", pa.bundle, "Bundle JSON")->required()->check(CLI::ExistingFile);
    probe->add_option("--snapshot", pa.snapshot, "Y path listing or tree (default <bundle>.capture/snapshot.txt)");
    probe->add_option("--snapshot-x", pa.snapshot_x, "X path listing; when given, old-side scores ignore paths outside it");
    probe->add_option("--gold", pa.gold, "X-side gold JSONL")->required()->check(CLI::ExistingFile);
    probe->add_option("--pred", pa.pred, "Prediction JSONL")->required()->check(CLI::ExistingFile);
    probe->add_option("--report", pa.report, "Probe report JSON to write")->required();

    AnswerArgs ba;
    auto* baseline = app.add_subcommand("baseline", "Answer questions with the lexical path ranker");
    baseline->add_option("--bundle", ba.bundle, "Bundle JSON (locates the default snapshot)")->check(CLI::ExistingFile);
    baseline->add_option("--snapshot", ba.snapshot, "Y path listing or tree");
    baseline->add_option("--questions", ba.questions, "Questions JSONL")->required()->check(CLI::ExistingFile);
    baseline->add_option("--contents", ba.contents, "Tree whose file contents add to the score")->check(CLI::ExistingDirectory);
    baseline->add_option("--top-k", ba.top_k, "Paths per answer");
    baseline->add_option("--min-score", ba.min_score, "Smallest score kept");
    baseline->add_option("--out", ba.out, "Prediction JSONL to write")->required();

    AnswerArgs aa;
    auto* answer = app.add_subcommand("answer", "Answer questions with a replay, service or lexical adapter");
    answer->add_option("--adapter", aa.adapter, "replay, service or lexical")->check(CLI::IsMember({"replay", "service", "lexical"}));
    answer->add_option("--bundle", aa.bundle, "Bundle JSON (locates the default snapshot)")->check(CLI::ExistingFile);
    answer->add_option("--snapshot", aa.snapshot, "Y path listing or tree (lexical)");
    answer->add_option("--questions", aa.questions, "Questions JSONL")->check(CLI::ExistingFile);
    answer->add_option("--prompts", aa.prompts, "Prompt JSONL from `drift icl`")->check(CLI::ExistingFile);
    answer->add_option("--replay", aa.replay, "Stored outputs JSONL (replay)")->check(CLI::ExistingFile);
    answer->add_option("--contents", aa.contents, "Tree whose file contents add to the score (lexical)")->check(CLI::ExistingDirectory);
    answer->add_option("--cache", aa.cache, "Service response cache directory");
    answer->add_option("--top-k", aa.top_k, "Paths per answer (lexical)");
    answer->add_option("--min-score", aa.min_score, "Smallest score kept (lexical)");
    answer->add_option("--workers", aa.workers, "Parallel service calls");
    answer->add_option("--out", aa.out, "Prediction JSONL to write")->required();

    ReportArgs ra;
    auto* report = app.add_subcommand("report", "Render an eval or probe report as a table");
    report->add_option("--report", ra.report, "Report JSON")->required()->check(CLI::ExistingFile);
    report->add_option("--base-report", ra.base_report, "Base report for the delta columns")->check(CLI::ExistingFile);
    report->add_option("--format", ra.format, "json, csv or md")->check(CLI::IsMember({"json", "csv", "md"}));
    report->add_option("--label", ra.label, "Row label of the report");
    report->add_option("--base-label", ra.base_label, "Row label of the base report");
    report->add_option("--out", ra.out, "File to write (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    log().set_level(spdlog::level::from_str(g.log_level));
    CLI::App* sub = app.get_subcommands().front();
    Provenance prov(sub->get_name(), effective_config(*sub, g));
    try {
        if (sub == window)
            return cmd_window(wa, prov);
        if (sub == summarize)
            return cmd_summarize(sa, prov);
        if (sub == dataset)
            return cmd_dataset(da, g, prov);
        if (sub == icl)
            return cmd_icl(ia, prov);
        if (sub == eval)
            return cmd_eval(ea, prov);
        if (sub == probe)
            return cmd_probe(pa, prov);
        if (sub == baseline) {
            ba.adapter = "lexical";
            return cmd_answer(ba, prov);
        }
        if (sub == answer)
            return cmd_answer(aa, prov);
        if (sub == report)
            return cmd_report(ra, prov);
    } catch (const CLI::ParseError& e) {
        std::cerr << "drift " << sub->get_name() << ": " << e.what() << " is required\n";
        return 2;
    } catch (const std::exception& e) {
        log().error("{}", e.what());
        return 1;
    }
    return 2;
}

} // namespace drift::cli
