#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "drift/alias.hpp"
#include "drift/change.hpp"
#include "drift/error.hpp"
#include "drift/io.hpp"
#include "drift/path.hpp"

namespace drift {

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        auto tab = line.find('\t', pos);
        fields.push_back(line.substr(pos, tab == std::string_view::npos ? std::string_view::npos : tab - pos));
        if (tab == std::string_view::npos)
            break;
        pos = tab + 1;
    }
    return fields;
}

inline NormalizedPath name_status_path(std::string_view field, std::size_t lineno) {
    auto unquoted = unquote_git_path(field);
    if (!unquoted)
        throw ParseError(lineno, "malformed quoted path " + std::string(field));
    if (!is_valid_utf8(*unquoted))
        throw ParseError(lineno, "path is not valid UTF-8");
    auto p = normalize_path(*unquoted);
    if (!p)
        throw ParseError(lineno, "invalid path '" + *unquoted + "'");
    return *p;
}

// "R085" -> 85; rejects anything but 1-3 digits in [0, 100].
inline int similarity_score(std::string_view code, std::size_t lineno) {
    std::string_view digits = code.substr(1);
    if (digits.empty() || digits.size() > 3 ||
        !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }))
        throw ParseError(lineno, "malformed similarity score in status '" + std::string(code) + "'");
    int score = std::stoi(std::string(digits));
    if (score > 100)
        throw ParseError(lineno, "similarity score above 100 in status '" + std::string(code) + "'");
    return score;
}

} // namespace detail

// Parses `git diff --name-status` output. Copies (Cnnn) become adds of the
// destination; any status outside A/C/D/M/R is an error.
inline std::vector<ChangeEntry> parse_name_status(std::string_view text) {
    std::vector<ChangeEntry> entries;
    std::size_t lineno = 0;
    for (const auto& line : split_lines(text)) {
        ++lineno;
        if (line.empty())
            continue;
        auto fields = detail::split_tabs(line);
        std::string_view code = fields[0];
        if (code.empty())
            throw ParseError(lineno, "missing status code");
        char kind = code[0];
        auto expect_fields = [&](std::size_t n) {
            if (fields.size() != n)
                throw ParseError(lineno, "status '" + std::string(code) + "' expects " + std::to_string(n - 1) +
                                             " path field(s), got " + std::to_string(fields.size() - 1));
        };
        switch (kind) {
        case 'A':
        case 'M':
        case 'D': {
            if (code.size() != 1)
                throw ParseError(lineno, "unknown status code '" + std::string(code) + "'");
            expect_fields(2);
            auto p = detail::name_status_path(fields[1], lineno);
            entries.push_back(kind == 'A'   ? ChangeEntry::added(p)
                              : kind == 'M' ? ChangeEntry::modified(p)
                                            : ChangeEntry::deleted(p));
            break;
        }
        case 'R':
        case 'C': {
            int score = detail::similarity_score(code, lineno);
            expect_fields(3);
            auto from = detail::name_status_path(fields[1], lineno);
            auto to = detail::name_status_path(fields[2], lineno);
            if (kind == 'C') {
                entries.push_back(ChangeEntry::added(to));
            } else {
                if (from == to)
                    throw ParseError(lineno, "rename source equals destination '" + from.str() + "'");
                entries.push_back(ChangeEntry::renamed(from, to, score));
            }
            break;
        }
        default:
            throw ParseError(lineno, "unknown status code '" + std::string(code) + "'");
        }
    }
    return entries;
}

struct RenameRecord {
    NormalizedPath old_path;
    NormalizedPath new_path;
    int score;

    friend bool operator==(const RenameRecord&, const RenameRecord&) = default;
};

// The per-window bundle: change rows, alias map and the per-status projections.
struct ChangeManifest {
    std::string base;
    std::string head;
    std::vector<ChangeEntry> changes;
    AliasMap alias_map;
    std::vector<NormalizedPath> adds;
    std::vector<NormalizedPath> mods;
    std::vector<NormalizedPath> deletes;
    std::vector<RenameRecord> renames;

    friend bool operator==(const ChangeManifest&, const ChangeManifest&) = default;

    // mods ∪ adds ∪ deletes ∪ rename olds ∪ rename news
    std::set<NormalizedPath> changed_paths() const {
        std::set<NormalizedPath> out(adds.begin(), adds.end());
        out.insert(mods.begin(), mods.end());
        out.insert(deletes.begin(), deletes.end());
        for (const auto& r : renames) {
            out.insert(r.old_path);
            out.insert(r.new_path);
        }
        return out;
    }

    std::set<NormalizedPath> modified_or_added() const {
        std::set<NormalizedPath> out(adds.begin(), adds.end());
        out.insert(mods.begin(), mods.end());
        return out;
    }

    ChangeEntry* find_change(const NormalizedPath& current_side) {
        for (auto& c : changes)
            if (c.path == current_side)
                return &c;
        return nullptr;
    }
};

// Sorts by Y-side path, drops exact duplicates, rejects entries that claim the
// same path inconsistently, and fills the projections and alias map.
inline ChangeManifest build_manifest(std::vector<ChangeEntry> entries, std::string base, std::string head) {
    auto order_key = [](const ChangeEntry& e) {
        return std::make_tuple(e.path.str(), static_cast<int>(e.status), e.old_path ? e.old_path->str() : std::string());
    };
    std::sort(entries.begin(), entries.end(),
              [&](const ChangeEntry& a, const ChangeEntry& b) { return order_key(a) < order_key(b); });
    entries.erase(std::unique(entries.begin(), entries.end(),
                              [](const ChangeEntry& a, const ChangeEntry& b) {
                                  return a.status == b.status && a.path == b.path && a.old_path == b.old_path &&
                                         a.rename_score == b.rename_score;
                              }),
                  entries.end());

    // Each path may be claimed by one entry, except that several renames may share a target.
    enum class Role { Current, RenameTarget, Retired };
    std::map<NormalizedPath, std::vector<std::pair<std::size_t, Role>>> claims;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        switch (e.status) {
        case ChangeStatus::Added:
        case ChangeStatus::Modified: claims[e.path].push_back({i, Role::Current}); break;
        case ChangeStatus::Deleted: claims[e.path].push_back({i, Role::Retired}); break;
        case ChangeStatus::Renamed:
            claims[e.path].push_back({i, Role::RenameTarget});
            claims[*e.old_path].push_back({i, Role::Retired});
            break;
        }
    }
    for (const auto& [path, list] : claims) {
        if (list.size() < 2)
            continue;
        bool all_targets = std::all_of(list.begin(), list.end(), [](const auto& c) { return c.second == Role::RenameTarget; });
        if (!all_targets) {
            std::string codes;
            for (const auto& c : list)
                codes += (codes.empty() ? "" : ", ") + entries[c.first].status_code();
            throw Error("conflicting change entries for '" + path.str() + "' (" + codes + ")");
        }
    }

    ChangeManifest m;
    m.base = std::move(base);
    m.head = std::move(head);
    for (const auto& e : entries) {
        switch (e.status) {
        case ChangeStatus::Added: m.adds.push_back(e.path); break;
        case ChangeStatus::Modified: m.mods.push_back(e.path); break;
        case ChangeStatus::Deleted: m.deletes.push_back(e.path); break;
        case ChangeStatus::Renamed: m.renames.push_back({*e.old_path, e.path, *e.rename_score}); break;
        }
    }
    m.alias_map = build_alias_map(entries);
    m.changes = std::move(entries);
    return m;
}

inline ordered_json to_json(const ChangeEntry& e) {
    ordered_json j;
    j["status"] = e.status_code();
    if (e.status == ChangeStatus::Renamed) {
        j["old_path"] = e.old_path->str();
        j["new_path"] = e.path.str();
    } else {
        j["path"] = e.path.str();
    }
    if (e.summary)
        j["summary"] = *e.summary;
    return j;
}

inline ordered_json to_json(const ChangeManifest& m) {
    auto paths = [](const std::vector<NormalizedPath>& v) {
        ordered_json a = ordered_json::array();
        for (const auto& p : v)
            a.push_back(p.str());
        return a;
    };
    ordered_json j;
    j["base"] = m.base;
    j["head"] = m.head;
    j["changes"] = ordered_json::array();
    for (const auto& c : m.changes)
        j["changes"].push_back(to_json(c));
    j["alias_map"] = m.alias_map.to_json();
    j["adds"] = paths(m.adds);
    j["mods"] = paths(m.mods);
    j["deletes"] = paths(m.deletes);
    j["renames"] = ordered_json::array();
    for (const auto& r : m.renames)
        j["renames"].push_back({{"old", r.old_path.str()}, {"new", r.new_path.str()}, {"score", rename_code(r.score)}});
    return j;
}

inline std::string serialize_manifest(const ChangeManifest& m) { return to_pretty_json(to_json(m)); }

namespace detail {

template <typename Json>
std::string string_field(const Json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j[key].is_string())
        throw Error(where + ": missing string field '" + key + "'");
    return j[key].template get<std::string>();
}

template <typename Json>
NormalizedPath path_field(const Json& j, const char* key, const std::string& where) {
    auto raw = string_field(j, key, where);
    auto p = normalize_path(raw);
    if (!p || p->str() != raw)
        throw Error(where + ": field '" + key + "' is not a normalized path: '" + raw + "'");
    return *p;
}

} // namespace detail

// Inverse of to_json; the result is re-projected and checked against the
// stored lists so a hand-edited, inconsistent bundle is rejected.
template <typename Json>
ChangeManifest manifest_from_json(const Json& j) {
    if (!j.is_object())
        throw Error("bundle: top level must be an object");
    if (!j.contains("changes") || !j["changes"].is_array())
        throw Error("bundle: missing 'changes' array");
    std::vector<ChangeEntry> entries;
    std::size_t idx = 0;
    for (const auto& c : j["changes"]) {
        std::string where = "bundle changes[" + std::to_string(idx++) + "]";
        auto code = detail::string_field(c, "status", where);
        std::optional<ChangeEntry> e;
        if (code == "A")
            e = ChangeEntry::added(detail::path_field(c, "path", where));
        else if (code == "M")
            e = ChangeEntry::modified(detail::path_field(c, "path", where));
        else if (code == "D")
            e = ChangeEntry::deleted(detail::path_field(c, "path", where));
        else if (!code.empty() && code[0] == 'R')
            e = ChangeEntry::renamed(detail::path_field(c, "old_path", where), detail::path_field(c, "new_path", where),
                                     detail::similarity_score(code, idx));
        else
            throw Error(where + ": unknown status '" + code + "'");
        if (c.contains("summary") && c["summary"].is_string())
            e->summary = c["summary"].template get<std::string>();
        entries.push_back(std::move(*e));
    }
    ChangeManifest m = build_manifest(std::move(entries), detail::string_field(j, "base", "bundle"),
                                      detail::string_field(j, "head", "bundle"));

    if (j.contains("alias_map") && AliasMap::from_json(j["alias_map"]) != m.alias_map)
        throw Error("bundle: alias_map disagrees with changes");
    auto check_list = [&](const char* key, const std::vector<NormalizedPath>& expected) {
        if (!j.contains(key))
            return;
        std::vector<std::string> got, want;
        for (const auto& p : j[key])
            got.push_back(p.template get<std::string>());
        for (const auto& p : expected)
            want.push_back(p.str());
        if (got != want)
            throw Error(std::string("bundle: '") + key + "' disagrees with changes");
    };
    check_list("adds", m.adds);
    check_list("mods", m.mods);
    check_list("deletes", m.deletes);
    if (j.contains("renames") && j["renames"].size() != m.renames.size())
        throw Error("bundle: 'renames' disagrees with changes");
    return m;
}

inline ChangeManifest load_manifest(const fs::path& path) {
    ordered_json j;
    try {
        j = ordered_json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(path.string() + ": " + e.what());
    }
    return manifest_from_json(j);
}

} // namespace drift
