#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "drift/alias.hpp"
#include "drift/dataset.hpp"
#include "drift/io.hpp"
#include "drift/parallel.hpp"
#include "drift/text.hpp"

namespace drift {

enum class Reason { Direct, AliasRename, AliasDeleted, RescuedSuffix, RescuedFuzzy, Invalid, Unknown };

inline constexpr std::array<Reason, 7> kAllReasons = {Reason::Direct,        Reason::AliasRename,  Reason::AliasDeleted,
                                                      Reason::RescuedSuffix, Reason::RescuedFuzzy, Reason::Invalid,
                                                      Reason::Unknown};

inline const char* to_string(Reason r) {
    switch (r) {
    case Reason::Direct: return "direct";
    case Reason::AliasRename: return "alias_rename";
    case Reason::AliasDeleted: return "alias_deleted";
    case Reason::RescuedSuffix: return "rescued_suffix";
    case Reason::RescuedFuzzy: return "rescued_fuzzy";
    case Reason::Invalid: return "invalid";
    case Reason::Unknown: return "unknown";
    }
    return "unknown";
}

enum class Slice { New, Old, Mixed };

inline constexpr std::array<Slice, 3> kAllSlices = {Slice::New, Slice::Old, Slice::Mixed};

inline const char* to_string(Slice s) {
    switch (s) {
    case Slice::New: return "NEW";
    case Slice::Old: return "OLD";
    case Slice::Mixed: return "MIXED";
    }
    return "MIXED";
}

// Strings of the first JSON array found in `raw`, first occurrence kept.
inline std::vector<std::string> parse_prediction(std::string_view raw) {
    std::vector<std::string> out;
    auto arr = extract_first_json(raw, '[');
    if (!arr)
        return out;
    std::unordered_set<std::string> seen;
    for (const auto& v : *arr) {
        if (!v.is_string())
            continue;
        auto s = v.get<std::string>();
        if (seen.insert(s).second)
            out.push_back(std::move(s));
    }
    return out;
}

inline constexpr double kFuzzyRescueThreshold = 0.80;

// Diagnostic only: names the single snapshot path a stray prediction most
// plausibly meant, or Unknown when the match is absent or ambiguous.
inline Reason rescue_classify(const NormalizedPath& path, const SnapshotIndex& snapshot) {
    const std::string base = std::string(path.basename());
    const std::string suffix = "/" + base;
    std::size_t suffix_hits = 0;
    for (const auto& p : snapshot.paths()) {
        const std::string& s = p.str();
        if (s == base || (s.size() > suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0))
            ++suffix_hits;
    }
    if (suffix_hits == 1)
        return Reason::RescuedSuffix;

    double best = -1.0;
    std::size_t best_count = 0;
    for (const auto& p : snapshot.paths()) {
        double sim = path_similarity(path.str(), p.str());
        if (sim > best) {
            best = sim;
            best_count = 1;
        } else if (sim == best) {
            ++best_count;
        }
    }
    if (best_count == 1 && best >= kFuzzyRescueThreshold)
        return Reason::RescuedFuzzy;
    return Reason::Unknown;
}

struct RemapOptions {
    bool use_alias = true; // false: no-remap mode, every valid path is kept as predicted
    bool rescue = true;    // classify stray paths for the reason table
};

struct PathVerdict {
    std::string raw;
    Reason reason;
    std::optional<NormalizedPath> kept; // set iff the path counts toward scoring
};

struct RemapResult {
    std::set<NormalizedPath> remapped;
    std::vector<PathVerdict> verdicts;
};

// Per path: normalize, keep if present at Y, otherwise follow the alias map,
// otherwise drop (rescue tags are informational).
inline RemapResult remap_predictions(const std::vector<std::string>& paths, const AliasMap& alias, const SnapshotIndex& snapshot,
                                     const RemapOptions& opts = {}) {
    RemapResult out;
    std::unordered_set<std::string> seen;
    for (const auto& raw : paths) {
        if (!seen.insert(raw).second)
            continue;
        auto np = normalize_path(raw);
        if (!np) {
            out.verdicts.push_back({raw, Reason::Invalid, std::nullopt});
            continue;
        }
        if (!opts.use_alias || snapshot.contains(*np)) {
            out.verdicts.push_back({raw, Reason::Direct, *np});
            continue;
        }
        Resolution r = alias.resolve(*np);
        if (r.kind == Resolution::Kind::Deleted) {
            out.verdicts.push_back({raw, Reason::AliasDeleted, std::nullopt});
            continue;
        }
        if (r.kind == Resolution::Kind::Renamed && snapshot.contains(*r.path)) {
            out.verdicts.push_back({raw, Reason::AliasRename, *r.path});
            continue;
        }
        Reason why = opts.rescue ? rescue_classify(*np, snapshot) : Reason::Unknown;
        out.verdicts.push_back({raw, why, std::nullopt});
    }
    for (const auto& v : out.verdicts)
        if (v.kept)
            out.remapped.insert(*v.kept);
    return out;
}

struct InstanceScore {
    int em = 0;
    std::size_t numer = 0;
    std::size_t denom = 0;

    friend bool operator==(const InstanceScore&, const InstanceScore&) = default;
};

inline InstanceScore score_instance(const std::set<NormalizedPath>& predicted, const std::set<NormalizedPath>& gold) {
    if (gold.empty())
        throw Error("eval item has an empty gold set");
    InstanceScore s;
    for (const auto& p : predicted)
        if (gold.count(p))
            ++s.numer;
    s.denom = gold.size();
    s.em = predicted == gold ? 1 : 0;
    return s;
}

inline Slice classify_slice(const std::set<NormalizedPath>& gold, const std::set<NormalizedPath>& changed_ma) {
    std::size_t hits = 0;
    for (const auto& p : gold)
        hits += changed_ma.count(p);
    if (hits == gold.size())
        return Slice::New;
    if (hits == 0)
        return Slice::Old;
    return Slice::Mixed;
}

struct GoldItem {
    std::string id;
    std::string question;
    std::set<NormalizedPath> gold;
};

struct InstanceRecord {
    std::string id;
    std::string raw_output;
    std::vector<std::string> parsed_paths;
    std::set<NormalizedPath> remapped;
    std::set<NormalizedPath> gold;
    std::vector<PathVerdict> verdicts;
    InstanceScore score;
    Slice slice = Slice::Old;
};

struct SliceStats {
    std::size_t n = 0;
    std::size_t em_sum = 0;
    std::size_t numer = 0;
    std::size_t denom = 0;

    std::optional<double> em() const {
        return n ? std::optional<double>(static_cast<double>(em_sum) / static_cast<double>(n)) : std::nullopt;
    }
    std::optional<double> mr() const {
        return denom ? std::optional<double>(static_cast<double>(numer) / static_cast<double>(denom)) : std::nullopt;
    }
};

struct EvalReport {
    SliceStats all;
    std::map<Slice, SliceStats> per_slice;
    std::map<Reason, std::size_t> reason_counts;

    std::size_t n() const { return all.n; }
    double em() const { return all.em().value_or(0.0); }
    double mr() const { return all.mr().value_or(0.0); }
};

inline InstanceRecord score_record(const GoldItem& item, const std::string& raw_output, const AliasMap& alias,
                                   const SnapshotIndex& snapshot, const std::set<NormalizedPath>& changed_ma,
                                   const RemapOptions& opts = {}) {
    InstanceRecord rec;
    rec.id = item.id;
    rec.raw_output = raw_output;
    rec.parsed_paths = parse_prediction(raw_output);
    auto remap = remap_predictions(rec.parsed_paths, alias, snapshot, opts);
    rec.remapped = std::move(remap.remapped);
    rec.verdicts = std::move(remap.verdicts);
    rec.gold = item.gold;
    if (rec.gold.empty())
        throw Error("eval item '" + item.id + "' has an empty gold set");
    rec.score = score_instance(rec.remapped, rec.gold);
    rec.slice = classify_slice(rec.gold, changed_ma);
    return rec;
}

inline EvalReport score_corpus(const std::vector<InstanceRecord>& records) {
    if (records.empty())
        throw Error("cannot score an empty corpus");
    EvalReport r;
    for (Slice s : kAllSlices)
        r.per_slice[s] = {};
    for (Reason reason : kAllReasons)
        r.reason_counts[reason] = 0;
    for (const auto& rec : records) {
        for (SliceStats* st : {&r.all, &r.per_slice[rec.slice]}) {
            ++st->n;
            st->em_sum += static_cast<std::size_t>(rec.score.em);
            st->numer += rec.score.numer;
            st->denom += rec.score.denom;
        }
        for (const auto& v : rec.verdicts)
            ++r.reason_counts[v.reason];
    }
    return r;
}

// Missing predictions are scored as the empty answer "[]".
inline std::vector<InstanceRecord> evaluate(const std::vector<GoldItem>& gold, const std::map<std::string, std::string>& predictions,
                                            const AliasMap& alias, const SnapshotIndex& snapshot,
                                            const std::set<NormalizedPath>& changed_ma, const RemapOptions& opts = {},
                                            std::size_t workers = 4) {
    return parallel_map(gold, workers, [&](const GoldItem& g) {
        auto it = predictions.find(g.id);
        return score_record(g, it == predictions.end() ? std::string("[]") : it->second, alias, snapshot, changed_ma, opts);
    });
}

namespace detail {

inline nlohmann::ordered_json optional_number(const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

inline ordered_json path_array(const std::set<NormalizedPath>& s) {
    ordered_json a = ordered_json::array();
    for (const auto& p : s)
        a.push_back(p.str());
    return a;
}

} // namespace detail

inline ordered_json to_json(const EvalReport& r) {
    ordered_json j;
    j["n"] = r.n();
    j["em"] = r.em();
    j["mr"] = r.mr();
    ordered_json slices = ordered_json::object();
    for (Slice s : kAllSlices) {
        const auto& st = r.per_slice.at(s);
        slices[to_string(s)] = {{"n", st.n}, {"em", detail::optional_number(st.em())}, {"mr", detail::optional_number(st.mr())}};
    }
    j["per_slice"] = slices;
    ordered_json reasons = ordered_json::object();
    for (Reason reason : kAllReasons)
        reasons[to_string(reason)] = r.reason_counts.at(reason);
    j["reason_counts"] = reasons;
    return j;
}

inline ordered_json to_json(const InstanceRecord& rec) {
    ordered_json verdicts = ordered_json::array();
    for (const auto& v : rec.verdicts) {
        ordered_json e = {{"path", v.raw}, {"reason", to_string(v.reason)}};
        if (v.kept && v.kept->str() != v.raw)
            e["scored_as"] = v.kept->str();
        verdicts.push_back(e);
    }
    return {{"id", rec.id},
            {"raw_output", rec.raw_output},
            {"parsed_paths", rec.parsed_paths},
            {"remapped", detail::path_array(rec.remapped)},
            {"gold", detail::path_array(rec.gold)},
            {"reasons", verdicts},
            {"em", rec.score.em},
            {"recall_numer", rec.score.numer},
            {"recall_denom", rec.score.denom},
            {"slice", to_string(rec.slice)}};
}

// Gold records are {"id","question","gold_paths"}; "relevant_file_paths" is
// accepted too so training files double as eval sets.
inline std::vector<GoldItem> read_gold(const fs::path& path) {
    std::vector<GoldItem> out;
    std::set<std::string> ids;
    for (const auto& j : read_jsonl(path)) {
        QAExample ex = example_from_json(j);
        if (!ids.insert(ex.id).second)
            throw Error(path.string() + ": duplicate gold id '" + ex.id + "'");
        out.push_back({ex.id, ex.question, ex.gold_paths});
    }
    return out;
}

// Prediction records are {"id","raw_output"} or {"id","paths"}; the latter is
// re-serialized so both go through parse_prediction.
template <typename Json>
std::pair<std::string, std::string> prediction_from_json(const Json& j) {
    if (!j.contains("id") || !j["id"].is_string())
        throw Error("prediction record lacks a string 'id'");
    std::string id = j["id"].template get<std::string>();
    if (j.contains("raw_output") && j["raw_output"].is_string())
        return {id, j["raw_output"].template get<std::string>()};
    if (j.contains("paths") && j["paths"].is_array())
        return {id, j["paths"].dump()};
    throw Error("prediction '" + id + "' has neither 'raw_output' nor 'paths'");
}

inline std::map<std::string, std::string> read_predictions(const fs::path& path) {
    std::map<std::string, std::string> out;
    for (const auto& j : read_jsonl(path)) {
        auto [id, raw] = prediction_from_json(j);
        if (!out.emplace(id, raw).second)
            throw Error(path.string() + ": duplicate prediction id '" + id + "'");
    }
    return out;
}

struct ProbeCounts {
    std::size_t old_name = 0;
    std::size_t new_name = 0;
    std::size_t deleted_old = 0;
    std::size_t unknown = 0;

    std::size_t total() const { return old_name + new_name + deleted_old + unknown; }
};

struct ProbeReport {
    std::size_t n = 0;
    ProbeCounts counts;
    std::size_t emitted = 0; // predictions in D or in dom(alias) but absent at Y
    double emission_rate = 0.0;
    double old_em = 0.0;
    double old_mr = 0.0;
};

enum class ProbeClass { OldName, NewName, DeletedOld, Unknown };

inline ProbeClass classify_probe_path(const NormalizedPath& p, const AliasMap& alias, const SnapshotIndex& snapshot,
                                      const std::set<NormalizedPath>& rename_targets) {
    if (alias.is_deleted(p))
        return ProbeClass::DeletedOld;
    if (alias.contains(p))
        return ProbeClass::OldName;
    if (snapshot.contains(p) && rename_targets.count(p))
        return ProbeClass::NewName;
    return ProbeClass::Unknown;
}

// Forgetting probe: raw predictions against X-side gold, never remapped.
// When x_snapshot is given, predictions absent from it are dropped before the
// old-side scores; otherwise every valid path counts.
inline ProbeReport probe_score(const std::vector<GoldItem>& gold_old_side, const std::map<std::string, std::string>& predictions,
                               const AliasMap& alias, const SnapshotIndex& snapshot,
                               const std::optional<SnapshotIndex>& x_snapshot = std::nullopt) {
    for (const auto& g : gold_old_side) {
        if (g.gold.empty())
            throw Error("probe item '" + g.id + "' has an empty gold set");
        for (const auto& p : g.gold)
            if (!alias.contains(p))
                throw Error("probe item '" + g.id + "' has gold path '" + p.str() +
                            "' that was neither renamed nor deleted in this window");
    }
    ProbeReport r;
    r.n = gold_old_side.size();
    auto targets = alias.rename_targets();
    std::size_t em_sum = 0, numer = 0, denom = 0;
    for (const auto& g : gold_old_side) {
        auto it = predictions.find(g.id);
        auto paths = parse_prediction(it == predictions.end() ? std::string_view("[]") : std::string_view(it->second));
        std::set<NormalizedPath> predicted;
        for (const auto& raw : paths) {
            auto np = normalize_path(raw);
            if (!np) {
                ++r.counts.unknown;
                continue;
            }
            switch (classify_probe_path(*np, alias, snapshot, targets)) {
            case ProbeClass::OldName: ++r.counts.old_name; break;
            case ProbeClass::NewName: ++r.counts.new_name; break;
            case ProbeClass::DeletedOld: ++r.counts.deleted_old; break;
            case ProbeClass::Unknown: ++r.counts.unknown; break;
            }
            if (alias.is_deleted(*np) || (alias.contains(*np) && !snapshot.contains(*np)))
                ++r.emitted;
            if (!x_snapshot || x_snapshot->contains(*np))
                predicted.insert(*np);
        }
        auto s = score_instance(predicted, g.gold);
        em_sum += static_cast<std::size_t>(s.em);
        numer += s.numer;
        denom += s.denom;
    }
    std::size_t total = r.counts.total();
    r.emission_rate = total ? static_cast<double>(r.emitted) / static_cast<double>(total) : 0.0;
    r.old_em = r.n ? static_cast<double>(em_sum) / static_cast<double>(r.n) : 0.0;
    r.old_mr = denom ? static_cast<double>(numer) / static_cast<double>(denom) : 0.0;
    return r;
}

inline ordered_json to_json(const ProbeReport& r) {
    return {{"n", r.n},
            {"counts",
             {{"old_name", r.counts.old_name}, {"new_name", r.counts.new_name}, {"deleted_old", r.counts.deleted_old}, {"unknown", r.counts.unknown}}},
            {"emission_rate", r.emission_rate},
            {"old_em", r.old_em},
            {"old_mr", r.old_mr}};
}

} // namespace drift
