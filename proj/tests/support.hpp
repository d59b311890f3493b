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
#include "drift/path.hpp"

// Hand-rolled generators and naive oracles shared by the property tests.
namespace drift::testing {

inline NormalizedPath P(std::string_view s) { return require_path(s); }

inline std::set<NormalizedPath> Ps(std::initializer_list<std::string_view> xs) {
    std::set<NormalizedPath> out;
    for (auto x : xs)
        out.insert(P(x));
    return out;
}

// Braced single-entry maps are ambiguous with the copy constructor.
inline AliasMap A(AliasMap::Entries e) { return AliasMap(std::move(e)); }

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
    std::size_t between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }
    bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }

    template <typename T>
    const T& pick(const std::vector<T>& v) { return v[below(v.size())]; }

    template <typename T>
    std::vector<T> sample(std::vector<T> v, std::size_t k) {
        std::shuffle(v.begin(), v.end(), rng_);
        v.erase(v.begin() + static_cast<std::ptrdiff_t>(std::min(k, v.size())), v.end());
        return v;
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

inline std::vector<std::string> path_universe(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back("d" + std::to_string(i % 4) + "/f" + std::to_string(i) + ".py");
    return out;
}

// One random scoring instance: a universe of at most 20 paths, an alias map
// of at most 8 entries, a Y snapshot, Y-side gold and at most 6 raw predictions.
struct RandomInstance {
    std::vector<std::string> universe;
    AliasMap alias;
    SnapshotIndex snapshot;
    std::set<NormalizedPath> gold;
    std::vector<std::string> predictions;
};

inline RandomInstance random_instance(Gen& g) {
    RandomInstance r;
    r.universe = path_universe(g.between(3, 20));
    auto keys = g.sample(r.universe, g.between(0, std::min<std::size_t>(8, r.universe.size() - 1)));
    std::set<std::string> keyset(keys.begin(), keys.end());
    std::vector<std::string> non_keys;
    for (const auto& u : r.universe)
        if (!keyset.count(u))
            non_keys.push_back(u);
    AliasMap::Entries entries;
    for (const auto& k : keys) {
        if (g.chance(0.4))
            entries.emplace(P(k), std::nullopt);
        else
            entries.emplace(P(k), P(g.pick(non_keys)));
    }
    r.alias = AliasMap(std::move(entries));

    std::set<NormalizedPath> snap;
    for (const auto& u : non_keys)
        if (g.chance(0.8))
            snap.insert(P(u));
    for (const auto& k : keys)
        if (g.chance(0.1)) // an old path reused at Y
            snap.insert(P(k));
    if (snap.empty())
        snap.insert(P(non_keys.front()));
    r.snapshot = SnapshotIndex(snap);

    std::vector<NormalizedPath> snap_list(snap.begin(), snap.end());
    for (const auto& p : g.sample(snap_list, g.between(1, std::min<std::size_t>(4, snap_list.size()))))
        r.gold.insert(p);

    std::size_t n = g.between(0, 6);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t kind = g.below(10);
        if (kind == 0)
            r.predictions.push_back("../escape.py");
        else if (kind == 1)
            r.predictions.push_back("./" + g.pick(r.universe));
        else if (kind == 2)
            r.predictions.push_back("zz/unknown" + std::to_string(g.below(3)) + ".py");
        else if (kind == 3 && !r.gold.empty())
            r.predictions.push_back(std::next(r.gold.begin(), static_cast<std::ptrdiff_t>(g.below(r.gold.size())))->str());
        else
            r.predictions.push_back(g.pick(r.universe));
    }
    return r;
}

// Simulated history over fresh names: each window renames some live paths to
// never-seen names, deletes some and adds some, so no path is ever reused.
class HistorySim {
public:
    explicit HistorySim(Gen& g, std::size_t initial = 10) : g_(g) {
        for (std::size_t i = 0; i < initial; ++i)
            live_.insert(fresh());
    }

    AliasMap step() {
        AliasMap::Entries entries;
        std::vector<std::string> live(live_.begin(), live_.end());
        for (const auto& p : live) {
            std::size_t roll = g_.below(10);
            if (roll < 2) {
                entries.emplace(P(p), std::nullopt);
                live_.erase(p);
            } else if (roll < 5) {
                std::string n = fresh();
                entries.emplace(P(p), P(n));
                live_.erase(p);
                live_.insert(n);
            }
        }
        for (std::size_t i = g_.below(3); i > 0; --i)
            live_.insert(fresh());
        return AliasMap(std::move(entries));
    }

    const std::set<std::string>& live() const { return live_; }
    const std::vector<std::string>& ever() const { return ever_; }

private:
    std::string fresh() {
        std::string p = "m" + std::to_string(counter_ % 3) + "/n" + std::to_string(counter_) + ".py";
        ++counter_;
        ever_.push_back(p);
        return p;
    }

    Gen& g_;
    std::size_t counter_ = 0;
    std::set<std::string> live_;
    std::vector<std::string> ever_;
};

// Alias map viewed as a total function on strings: identity off its domain,
// nullopt for deletion (absorbing).
inline std::optional<std::string> apply_total(const AliasMap& m, const std::optional<std::string>& p) {
    if (!p)
        return std::nullopt;
    auto np = normalize_path(*p);
    auto it = m.entries().find(*np);
    if (it == m.entries().end())
        return p;
    if (!it->second)
        return std::nullopt;
    return it->second->str();
}

} // namespace drift::testing
