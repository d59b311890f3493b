#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "drift/change.hpp"
#include "drift/error.hpp"
#include "drift/io.hpp"
#include "drift/path.hpp"

namespace drift {

inline constexpr std::string_view kDeletedSentinel = "__DELETED__";

struct Resolution {
    enum class Kind { Kept, Renamed, Deleted };

    Kind kind;
    std::optional<NormalizedPath> path; // empty iff Deleted

    static Resolution kept(NormalizedPath p) { return {Kind::Kept, std::move(p)}; }
    static Resolution renamed(NormalizedPath p) { return {Kind::Renamed, std::move(p)}; }
    static Resolution deleted() { return {Kind::Deleted, std::nullopt}; }

    friend bool operator==(const Resolution&, const Resolution&) = default;
};

// old path -> new path, or -> deleted (an empty target). Maps are kept fully
// collapsed: no key maps to itself and no live target is itself a key.
class AliasMap {
public:
    using Target = std::optional<NormalizedPath>;
    using Entries = std::map<NormalizedPath, Target>;

    AliasMap() = default;

    // Throws if the entries violate the collapse invariants.
    explicit AliasMap(Entries entries) : entries_(std::move(entries)) {
        for (const auto& [key, target] : entries_) {
            if (!target)
                continue;
            if (*target == key)
                throw Error("alias map: '" + key.str() + "' maps to itself");
            if (entries_.count(*target))
                throw Error("alias map: target '" + target->str() + "' of '" + key.str() +
                            "' is itself an alias key (uncollapsed chain)");
        }
    }

    const Entries& entries() const noexcept { return entries_; }
    bool empty() const noexcept { return entries_.empty(); }
    std::size_t size() const noexcept { return entries_.size(); }
    bool contains(const NormalizedPath& p) const { return entries_.count(p) != 0; }

    bool is_deleted(const NormalizedPath& p) const {
        auto it = entries_.find(p);
        return it != entries_.end() && !it->second;
    }

    Resolution resolve(const NormalizedPath& p) const {
        auto it = entries_.find(p);
        if (it == entries_.end())
            return Resolution::kept(p);
        if (!it->second)
            return Resolution::deleted();
        return Resolution::renamed(*it->second);
    }

    std::set<NormalizedPath> deleted_set() const {
        std::set<NormalizedPath> out;
        for (const auto& [k, t] : entries_)
            if (!t)
                out.insert(k);
        return out;
    }

    std::set<NormalizedPath> rename_targets() const {
        std::set<NormalizedPath> out;
        for (const auto& [k, t] : entries_)
            if (t)
                out.insert(*t);
        return out;
    }

    ordered_json to_json() const {
        ordered_json j = ordered_json::object();
        for (const auto& [k, t] : entries_)
            j[k.str()] = t ? t->str() : std::string(kDeletedSentinel);
        return j;
    }

    template <typename Json>
    static AliasMap from_json(const Json& j) {
        if (!j.is_object())
            throw Error("alias_map must be a JSON object");
        Entries entries;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!it.value().is_string())
                throw Error("alias_map value for '" + it.key() + "' is not a string");
            auto key = normalize_path(it.key());
            if (!key)
                throw Error("alias_map key is not a valid path: '" + it.key() + "'");
            auto value = it.value().template get<std::string>();
            if (value == kDeletedSentinel) {
                entries.emplace(*key, std::nullopt);
            } else {
                auto target = normalize_path(value);
                if (!target)
                    throw Error("alias_map target is not a valid path: '" + value + "'");
                entries.emplace(*key, *target);
            }
        }
        return AliasMap(std::move(entries));
    }

    friend bool operator==(const AliasMap&, const AliasMap&) = default;

private:
    Entries entries_;
};

inline Resolution resolve(const AliasMap& m, const NormalizedPath& p) { return m.resolve(p); }

// D entries map to deleted, R entries map old -> new; A and M contribute nothing.
// Several old paths may share one target; one old path with two targets is an error.
inline AliasMap build_alias_map(const std::vector<ChangeEntry>& entries) {
    AliasMap::Entries out;
    auto add = [&](const NormalizedPath& key, AliasMap::Target target) {
        auto [it, inserted] = out.emplace(key, target);
        if (!inserted && it->second != target)
            throw Error("ambiguous structural history: '" + key.str() + "' maps to both " +
                        (it->second ? "'" + it->second->str() + "'" : std::string(kDeletedSentinel)) + " and " +
                        (target ? "'" + target->str() + "'" : std::string(kDeletedSentinel)));
    };
    for (const auto& e : entries) {
        if (e.status == ChangeStatus::Deleted)
            add(e.path, std::nullopt);
        else if (e.status == ChangeStatus::Renamed)
            add(*e.old_path, e.path);
    }
    return AliasMap(std::move(out));
}

// Alias map for X->Z from maps for X->Y and Y->Z. Viewing each map as a total
// function (identity off its domain, deletion absorbing), the result is
// second ∘ first. A path retired in `first` but re-created by `second` is live
// at Z, so its stale key is dropped to keep the result collapsed.
inline AliasMap compose(const AliasMap& first, const AliasMap& second) {
    AliasMap::Entries out;
    for (const auto& [key, target] : first.entries()) {
        if (!target) {
            out.emplace(key, std::nullopt);
            continue;
        }
        Resolution r = second.resolve(*target);
        if (r.kind == Resolution::Kind::Deleted)
            out.emplace(key, std::nullopt);
        else if (*r.path != key)
            out.emplace(key, *r.path);
    }
    for (const auto& [key, target] : second.entries())
        out.emplace(key, target); // keys already present from `first` shadow these

    std::set<NormalizedPath> live;
    for (const auto& [key, target] : out)
        if (target)
            live.insert(*target);
    for (const auto& p : live)
        out.erase(p);
    return AliasMap(std::move(out));
}

// P_Y: the finite set of paths that exist at a snapshot.
class SnapshotIndex {
public:
    SnapshotIndex() = default;
    explicit SnapshotIndex(std::set<NormalizedPath> paths) : paths_(std::move(paths)) {}

    bool contains(const NormalizedPath& p) const { return paths_.count(p) != 0; }
    const std::set<NormalizedPath>& paths() const noexcept { return paths_; }
    std::size_t size() const noexcept { return paths_.size(); }
    bool empty() const noexcept { return paths_.empty(); }

    // Newline-delimited listing; blank lines skipped, invalid paths rejected.
    static SnapshotIndex from_listing(std::string_view text) {
        std::set<NormalizedPath> paths;
        std::size_t lineno = 0;
        for (const auto& line : split_lines(text)) {
            ++lineno;
            if (line.empty())
                continue;
            auto p = normalize_path(line);
            if (!p)
                throw ParseError(lineno, "invalid snapshot path '" + line + "'");
            paths.insert(*p);
        }
        return SnapshotIndex(std::move(paths));
    }

    // Every regular file under root, skipping the .git directory.
    static SnapshotIndex from_tree(const std::filesystem::path& root) {
        std::set<NormalizedPath> paths;
        for (auto it = std::filesystem::recursive_directory_iterator(root); it != std::filesystem::recursive_directory_iterator(); ++it) {
            if (it->is_directory() && it->path().filename() == ".git") {
                it.disable_recursion_pending();
                continue;
            }
            if (!it->is_regular_file())
                continue;
            auto rel = std::filesystem::relative(it->path(), root).generic_string();
            if (auto p = normalize_path(rel))
                paths.insert(*p);
        }
        return SnapshotIndex(std::move(paths));
    }

    // A directory is walked; anything else is read as a listing.
    static SnapshotIndex load(const std::filesystem::path& source) {
        if (std::filesystem::is_directory(source))
            return from_tree(source);
        return from_listing(read_text_file(source));
    }

    std::string to_listing() const {
        std::string out;
        for (const auto& p : paths_) {
            out += p.str();
            out += '\n';
        }
        return out;
    }

private:
    std::set<NormalizedPath> paths_;
};

} // namespace drift
