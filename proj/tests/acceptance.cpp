// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: drift_acceptance <path-to-drift-binary> <tests-source-dir>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>

#include "drift/dataset.hpp"
#include "drift/eval.hpp"
#include "drift/icl.hpp"
#include "drift/manifest.hpp"
#include "drift/report.hpp"
#include "drift/summarize.hpp"
#include "drift/window.hpp"
#include "fixture_repo.hpp"
#include "icl_fixtures.hpp"
#include "oracle.hpp"
#include "pipeline_support.hpp"
#include "support.hpp"

using namespace drift;
using namespace drift::testing;

namespace {

struct Failure {
    std::string why;
};

void require(bool ok, const std::string& why) {
    if (!ok)
        throw Failure{why};
}

std::string drift_binary;
fs::path source_dir;

AliasMap flask_alias() { return A({{P("flask/app.py"), P("src/flask/app.py")}, {P("flask/__init__.py"), std::nullopt}}); }

void worked_example() {
    SnapshotIndex snap(Ps({"src/flask/app.py", "src/flask/cli.py"}));
    require(!snap.contains(P("README.md")), "README.md must be absent at Y");
    auto recs = evaluate({{"w", "Where is the app object created?", Ps({"src/flask/app.py"})}},
                         {{"w", R"(["flask/app.py","README.md"])"}}, flask_alias(), snap, {});
    auto rep = score_corpus(recs);
    require(rep.em() == 1.0, "EM = " + fixed(rep.em(), 4));
    require(rep.mr() == 1.0, "MR = " + fixed(rep.mr(), 4));
}

void probe_arithmetic() {
    AliasMap::Entries e;
    std::set<NormalizedPath> y;
    for (int i = 0; i < 10; ++i) {
        e.emplace(P("flask/m" + std::to_string(i) + ".py"), P("src/flask/m" + std::to_string(i) + ".py"));
        y.insert(P("src/flask/m" + std::to_string(i) + ".py"));
    }
    AliasMap alias(std::move(e));
    std::vector<GoldItem> gold;
    std::map<std::string, std::string> preds;
    for (int i = 0; i < 100; ++i) {
        std::string id = "p" + std::to_string(i);
        gold.push_back({id, "q", {P("flask/m" + std::to_string(i % 10) + ".py")}});
        if (i < 66) // old name, matching X-side gold
            preds[id] = "[\"flask/m" + std::to_string(i % 10) + ".py\"]";
        else if (i < 78) // old name, wrong file
            preds[id] = "[\"flask/m" + std::to_string((i + 3) % 10) + ".py\"]";
        else
            preds[id] = "[\"nowhere/u" + std::to_string(i) + ".py\"]";
    }
    auto r = probe_score(gold, preds, alias, SnapshotIndex(y));
    require(r.counts.old_name == 78 && r.counts.new_name == 0 && r.counts.deleted_old == 0 && r.counts.unknown == 22,
            "counts " + to_json(r)["counts"].dump());
    require(r.emission_rate == 0.78, "emission_rate = " + std::to_string(r.emission_rate));
    require(r.old_em == 0.66 && r.old_mr == 0.66, "old_em/old_mr = " + std::to_string(r.old_em) + "/" + std::to_string(r.old_mr));
}

void oracle_equivalence() {
    auto start = std::chrono::steady_clock::now();
    Gen g(1234);
    for (bool remap : {true, false}) {
        std::vector<InstanceRecord> recs;
        OracleTally t;
        for (int i = 0; i < 1000; ++i) {
            auto inst = random_instance(g);
            require(inst.universe.size() <= 20 && inst.alias.size() <= 8 && inst.predictions.size() <= 6, "generator out of bounds");
            ordered_json arr = inst.predictions;
            recs.push_back(score_record({std::to_string(i), "q", inst.gold}, arr.dump(), inst.alias, inst.snapshot, {}, {remap, true}));
            oracle_score(inst, remap, t);
        }
        auto rep = score_corpus(recs);
        require(rep.em() == static_cast<double>(t.em) / static_cast<double>(t.n), "EM differs from the oracle");
        require(rep.mr() == static_cast<double>(t.numer) / static_cast<double>(t.denom), "MR differs from the oracle");
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    require(secs < 5.0, "took " + std::to_string(secs) + " s");
}

void remap_monotonicity() {
    Gen g(1234);
    std::size_t violations = 0;
    for (int i = 0; i < 1000; ++i) {
        auto inst = random_instance(g);
        ordered_json arr = inst.predictions;
        auto with = score_record({"i", "q", inst.gold}, arr.dump(), inst.alias, inst.snapshot, {}, {true, true}).score;
        auto without = score_record({"i", "q", inst.gold}, arr.dump(), inst.alias, inst.snapshot, {}, {false, true}).score;
        violations += (with.em < without.em) || (with.numer < without.numer);
    }
    require(violations == 0, std::to_string(violations) + " violations");
}

void dataset_safety() {
    TempDir dir("drift-accept-forge");
    auto fx = make_flask_fixture(dir / "repo");
    auto cap = capture_window({fx.root, "x", "y"}, {true, 2});
    auto m = manifest_from_capture(cap);
    require(m.deletes.size() >= 3 && m.renames.size() >= 3 && m.mods.size() >= 5, "fixture window too small");
    auto summaries = summarize_manifest(m, [&](const ChangeEntry& e) { return cap.patch_for(e.path); }, SummarizeOptions{});
    auto snap = SnapshotIndex::from_listing(cap.snapshot_listing);
    auto forge = [&](std::uint64_t seed) {
        ForgeOptions o;
        o.target = 8;
        o.recipe = {96, 192, seed};
        return forge_dataset(m, summaries, cap.files, snap, fixture_old_pool(fx), o);
    };
    auto r = forge(7);
    auto deleted = m.alias_map.deleted_set();
    auto changed = m.changed_paths();
    std::size_t n_new = 0, n_old = 0, deleted_labels = 0, old_touching = 0;
    for (const auto& e : r.training) {
        for (const auto& p : e.gold_paths)
            deleted_labels += deleted.count(p) || !snap.contains(p);
        if (e.origin == Origin::New) {
            ++n_new;
        } else {
            ++n_old;
            for (const auto& p : e.gold_paths)
                old_touching += changed.count(p);
        }
    }
    require(deleted_labels == 0, std::to_string(deleted_labels) + " labels name deleted or absent paths");
    require(old_touching == 0, std::to_string(old_touching) + " OLD labels touch the change lists");
    require(n_new == 96 && n_old == 192, std::to_string(n_new) + " NEW + " + std::to_string(n_old) + " OLD");
    auto dump = [](const ForgeResult& fr) {
        std::vector<ordered_json> rows;
        for (const auto& e : fr.training)
            rows.push_back(to_training_record(e));
        return to_jsonl(rows);
    };
    require(dump(r) == dump(forge(7)), "rerun under the same seed differs");
}

void manifest_fidelity() {
    auto start = std::chrono::steady_clock::now();
    TempDir dir("drift-accept-window");
    fs::path root = dir / "repo";
    git_init(root);
    put(root, "a.py", py_module("a", 4));
    put(root, "c.py", "def c():\n    return 3\n");
    put(root, "m.py", "def m():\n    return 1\n");
    commit_all(root, "base", "x");
    fs::create_directories(root / "b");
    fs::rename(root / "a.py", root / "b/a.py");
    put(root, "b/a.py", py_module("a", 4) + "def extra():\n    return 9\n");
    fs::remove(root / "c.py");
    put(root, "m.py", "def m():\n    return 2\n");
    put(root, "n.py", "def n():\n    return 0\n");
    commit_all(root, "head", "y");

    auto cap = capture_window({root, "x", "y"}, {true, 2});
    auto m = manifest_from_capture(cap);
    auto oracle = split_lines(git(root, {"diff", "--name-status", "-M", "x", "y", "--", "*.py"}));
    std::size_t renames = 0;
    for (const auto& line : oracle) {
        if (line.empty())
            continue;
        auto f = drift::detail::split_tabs(line);
        if (f[0][0] == 'R') {
            ++renames;
            require(m.renames.size() == 1 && m.renames[0].old_path.str() == f[1] && m.renames[0].new_path.str() == f[2],
                    "rename row " + line);
            require(rename_code(m.renames[0].score) == f[0], "score " + rename_code(m.renames[0].score) + " vs " + std::string(f[0]));
            require(m.alias_map.resolve(P(f[1])) == Resolution::renamed(P(f[2])), "alias for " + std::string(f[1]));
        } else if (f[0] == "D") {
            require(m.deletes == std::vector<NormalizedPath>{P(f[1])} && m.alias_map.is_deleted(P(f[1])), "delete row " + line);
        } else if (f[0] == "M") {
            require(m.mods == std::vector<NormalizedPath>{P(f[1])}, "modify row " + line);
        } else if (f[0] == "A") {
            require(m.adds == std::vector<NormalizedPath>{P(f[1])}, "add row " + line);
        } else {
            require(false, "unexpected git row " + line);
        }
    }
    require(renames == 1 && m.changes.size() == 4 && m.alias_map.size() == 2, "row counts differ from git");
    fs::path bundle = dir / "bundle.json";
    write_file_atomic(bundle, serialize_manifest(m));
    auto back = load_manifest(bundle);
    require(back == m && serialize_manifest(back) == serialize_manifest(m), "bundle does not re-parse losslessly");
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    require(secs < 2.0, "took " + std::to_string(secs) + " s");
}

void composition_algebra() {
    Gen g(2024);
    for (int trial = 0; trial < 500; ++trial) {
        HistorySim sim(g);
        AliasMap a = sim.step();
        AliasMap b = sim.step();
        AliasMap c = sim.step();
        AliasMap ab = compose(a, b);
        for (const auto& p : sim.ever())
            require(apply_total(ab, p) == apply_total(b, apply_total(a, p)), "collapse fails for " + p);
        for (const auto& [key, target] : ab.entries())
            require(!target || !ab.contains(*target), "uncollapsed chain at " + key.str());
        for (const auto& [key, target] : a.entries()) {
            if (!target || b.is_deleted(*target))
                require(ab.is_deleted(key), "deletion not dominant for " + key.str());
        }
        require(compose(ab, c) == compose(a, compose(b, c)), "not associative at trial " + std::to_string(trial));
    }
}

void prompt_contract() {
    for (const auto& [name, prompt] : golden_prompts()) {
        auto bad = prompt_contract_violation(prompt);
        require(bad.empty(), name + ": " + bad);
        fs::path file = source_dir / "golden" / name;
        require(fs::exists(file), file.string() + " missing");
        require(read_text_file(file) == prompt.rendered(), name + " differs from its golden file");
    }
    auto empty = build_icl_prompt("Where is the application factory?", {}, 8, 16000);
    require(empty.delta_entries.empty() && prompt_contract_violation(empty).empty(), "delta-free prompt");
    Gen g(8);
    for (int i = 0; i < 200; ++i) {
        auto ds = flask_deltas();
        std::size_t base = compose_prompt("q db", {}, {}).total_chars();
        auto p = build_icl_prompt("q db", g.sample(ds, g.between(0, ds.size())), g.between(0, 8), base + g.between(0, 600));
        require(prompt_contract_violation(p).empty(), prompt_contract_violation(p));
    }
}

ordered_json slice_report(double em) {
    return ordered_json::parse(R"({"n":24,"em":)" + fixed(em, 4) +
                               R"(,"mr":0.5,"per_slice":{"NEW":{"n":0,"em":null,"mr":null},"OLD":{"n":0,"em":null,"mr":null},)"
                               R"("MIXED":{"n":24,"em":)" +
                               fixed(em, 4) + R"(,"mr":0.5}},"reason_counts":{}})");
}

void report_rendering() {
    auto md = render_report(slice_report(0.7500), ReportFormat::Markdown, slice_report(0.5417), {"delta-ICL", "base"});
    require(md.find("| delta-ICL | 0.7500 | 0.5000 | +0.2083 | +0.0000 |") != std::string::npos, "markdown row:\n" + md);
    require(md.find("| base | 0.5417 | 0.5000 | +0.0000 | +0.0000 |") != std::string::npos, "base row:\n" + md);
    auto csv = render_report(slice_report(0.7500), ReportFormat::Csv, slice_report(0.5417), {"delta-ICL", "base"});
    require(csv.find("delta-ICL,MIXED,24,0.7500,0.5000,+0.2083,+0.0000\r\n") != std::string::npos, "csv row:\n" + csv);
}

// ---- end to end -----------------------------------------------------------

struct Pipeline {
    fs::path dir;

    void drift(std::vector<std::string> args) {
        args.insert(args.begin(), {drift_binary, "--log-level", "warn", "--seed", "7"});
        auto r = run_process(args, {dir, {}, ""});
        std::string cmd = args[5];
        require(r.exit_code == 0, "drift " + cmd + " exited " + std::to_string(r.exit_code) + ": " + r.err);
    }
    std::string at(const std::string& rel) const { return (dir / rel).string(); }
};

void require_meta(const fs::path& artifact, const std::string& command) {
    fs::path meta_path = artifact;
    meta_path += ".meta.json";
    require(fs::exists(meta_path), meta_path.string() + " missing");
    auto meta = ordered_json::parse(read_text_file(meta_path));
    require(meta.value("tool", "") == "drift" && meta.value("command", "") == command, meta_path.string() + ": wrong tool/command");
    require(meta.contains("effective_config") && meta.value("config_hash", "") == sha256_hex(meta["effective_config"].dump()),
            meta_path.string() + ": config hash mismatch");
    require(meta["inputs"].is_object() && !meta["inputs"].empty(), meta_path.string() + ": no inputs");
}

bool is_string_array(const ordered_json& a, bool nonempty) {
    if (!a.is_array() || (nonempty && a.empty()))
        return false;
    for (const auto& x : a)
        if (!x.is_string() || !normalize_path(x.get<std::string>()))
            return false;
    return true;
}

void require_slices(const ordered_json& r, const std::string& what) {
    require(r["n"].is_number_unsigned() && r["em"].is_number() && r["mr"].is_number(), what + ": n/em/mr");
    for (const char* s : {"NEW", "OLD", "MIXED"}) {
        const auto& sl = r["per_slice"][s];
        require(sl["n"].is_number_unsigned(), what + ": per_slice." + s + ".n");
        bool empty = sl["n"] == 0;
        require(empty ? sl["em"].is_null() && sl["mr"].is_null() : sl["em"].is_number() && sl["mr"].is_number(),
                what + ": per_slice." + s + " metrics");
    }
    for (const char* k : {"direct", "alias_rename", "alias_deleted", "rescued_suffix", "rescued_fuzzy", "invalid", "unknown"})
        require(r["reason_counts"][k].is_number_unsigned(), what + ": reason_counts." + k);
}

void end_to_end() {
    auto start = std::chrono::steady_clock::now();
    TempDir dir("drift-accept-e2e");
    auto fx = make_flask_fixture(dir / "repo");
    Pipeline p{dir.path()};
    write_file_atomic(dir / "old.jsonl", fixture_old_pool_jsonl(fx));

    p.drift({"window", "--repo", fx.root.string(), "--base", "x", "--head", "y", "--include-deletes", "--out", p.at("bundle.json")});
    auto m = load_manifest(dir / "bundle.json");
    require(m.renames.size() == 4 && m.deletes.size() == 3 && m.mods.size() >= 5, "window counts");
    require(fs::exists(dir / "bundle.json.capture/snapshot.txt"), "capture missing");
    require_meta(dir / "bundle.json", "window");

    p.drift({"summarize", "--bundle", p.at("bundle.json"), "--backend", "heuristic"});
    m = load_manifest(dir / "bundle.json");
    for (const auto& c : m.changes)
        require(c.summary && !c.summary->empty(), "no summary for " + c.path.str());
    require_meta(dir / "bundle.json", "summarize");

    p.drift({"dataset", "--bundle", p.at("bundle.json"), "--old-pool", p.at("old.jsonl"), "--new", "96", "--old", "192", "--target", "8",
             "--reject-log", p.at("rejects.jsonl"), "--out", p.at("train.jsonl")});
    auto train = read_jsonl(dir / "train.jsonl");
    require(train.size() == 288, "train has " + std::to_string(train.size()) + " records");
    auto snap = SnapshotIndex::load(dir / "bundle.json.capture/snapshot.txt");
    std::size_t n_new = 0;
    for (const auto& t : train) {
        require(t["id"].is_string() && t["question"].is_string() && is_string_array(t["relevant_file_paths"], true) &&
                    (t["origin"] == "NEW" || t["origin"] == "OLD") && t["mode"].is_string(),
                "training record " + t.dump());
        for (const auto& g : t["relevant_file_paths"])
            require(snap.contains(P(g.get<std::string>())), "label absent at Y: " + g.get<std::string>());
        n_new += t["origin"] == "NEW";
    }
    require(n_new == 96, std::to_string(n_new) + " NEW records");
    require_meta(dir / "train.jsonl", "dataset");

    p.drift({"icl", "--bundle", p.at("bundle.json"), "--questions", p.at("train.jsonl"), "--k", "4", "--budget", "6000", "--out",
             p.at("prompts.jsonl")});
    auto prompts = read_jsonl(dir / "prompts.jsonl");
    require(prompts.size() == 288, "prompt count");
    for (const auto& pr : prompts) {
        require(pr["id"].is_string() && pr["system"].is_string() && pr["user"].is_string() && is_string_array(pr["included_paths"], false),
                "prompt record " + pr.dump().substr(0, 200));
        std::string sys = pr["system"];
        require(sys.find(kStrictOutputRules) != std::string::npos && sys.find("<delta_info>\n") != std::string::npos, "prompt contract");
        require(sys.size() + 1 + pr["user"].get<std::string>().size() <= 6000, "prompt over budget");
    }
    require_meta(dir / "prompts.jsonl", "icl");

    p.drift({"baseline", "--bundle", p.at("bundle.json"), "--questions", p.at("train.jsonl"), "--contents", fx.root.string(), "--out",
             p.at("pred.jsonl")});
    auto preds = read_jsonl(dir / "pred.jsonl");
    require(preds.size() == 288, "prediction count");
    for (const auto& pr : preds)
        require(pr["id"].is_string() && pr["raw_output"].is_string() &&
                    ordered_json::parse(pr["raw_output"].get<std::string>()).is_array(),
                "prediction record " + pr.dump());
    require_meta(dir / "pred.jsonl", "baseline");

    p.drift({"eval", "--bundle", p.at("bundle.json"), "--gold", p.at("train.jsonl"), "--pred", p.at("pred.jsonl"), "--records",
             p.at("records.jsonl"), "--report", p.at("eval.json")});
    auto report = ordered_json::parse(read_text_file(dir / "eval.json"));
    require_slices(report, "eval.json");
    require(report["n"] == 288, "eval n");
    require(read_jsonl(dir / "records.jsonl").size() == 288, "instance record count");
    require_meta(dir / "eval.json", "eval");

    // X-side gold on every renamed or deleted path; the ranker answers from Y.
    std::vector<ordered_json> probe_gold;
    std::vector<std::string> x_side = fx.renamed_from;
    x_side.insert(x_side.end(), fx.deleted.begin(), fx.deleted.end());
    for (const auto& x : x_side) {
        std::string stem = fs::path(x).stem().string();
        probe_gold.push_back({{"id", "probe-" + stem}, {"question", "Which flask module holds " + stem + "?"}, {"gold_paths", {x}}});
    }
    write_file_atomic(dir / "probe_gold.jsonl", to_jsonl(probe_gold));
    p.drift({"baseline", "--bundle", p.at("bundle.json"), "--questions", p.at("probe_gold.jsonl"), "--out", p.at("probe_pred.jsonl")});
    write_file_atomic(dir / "x.txt", git(fx.root, {"ls-tree", "-r", "--name-only", "x"}));
    p.drift({"probe", "--bundle", p.at("bundle.json"), "--snapshot-x", p.at("x.txt"), "--gold", p.at("probe_gold.jsonl"), "--pred",
             p.at("probe_pred.jsonl"), "--report", p.at("probe.json")});
    auto probe = ordered_json::parse(read_text_file(dir / "probe.json"));
    require(probe["n"] == x_side.size(), "probe n");
    std::size_t total = 0;
    for (const char* k : {"old_name", "new_name", "deleted_old", "unknown"}) {
        require(probe["counts"][k].is_number_unsigned(), std::string("probe counts.") + k);
        total += probe["counts"][k].get<std::size_t>();
    }
    for (const char* k : {"emission_rate", "old_em", "old_mr"}) {
        require(probe[k].is_number() && probe[k].get<double>() >= 0.0 && probe[k].get<double>() <= 1.0, std::string("probe ") + k);
    }
    require(total == 0 ? probe["emission_rate"] == 0.0 : true, "emission rate with no predictions");
    require_meta(dir / "probe.json", "probe");

    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    require(secs < 30.0, "took " + std::to_string(secs) + " s");
}

} // namespace

int main(int argc, char** argv) {
    if (argc != 3) {
        std::cerr << "usage: drift_acceptance <drift-binary> <tests-source-dir>\n";
        return 2;
    }
    drift_binary = fs::absolute(argv[1]).string();
    source_dir = argv[2];

    const std::vector<std::pair<std::string, std::function<void()>>> criteria = {
        {"worked example scores EM 1 and MR 1", worked_example},
        {"probe arithmetic 0.78 / 0.66", probe_arithmetic},
        {"scorer equals the brute-force oracle", oracle_equivalence},
        {"remapping is monotone", remap_monotonicity},
        {"dataset safety and the 96/192 recipe", dataset_safety},
        {"manifest matches git name-status", manifest_fidelity},
        {"alias composition algebra", composition_algebra},
        {"prompt contract and goldens", prompt_contract},
        {"report delta renders +0.2083", report_rendering},
        {"end-to-end offline pipeline", end_to_end},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        std::string why;
        auto start = std::chrono::steady_clock::now();
        try {
            criteria[i].second();
        } catch (const Failure& f) {
            why = f.why;
        } catch (const std::exception& e) {
            why = std::string("exception: ") + e.what();
        }
        double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s criterion %zu: %s (%.0f ms)%s%s\n", why.empty() ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), ms,
                    why.empty() ? "" : " -- ", why.c_str());
        failed += !why.empty();
    }
    std::fflush(stdout);
    return failed ? 1 : 0;
}
