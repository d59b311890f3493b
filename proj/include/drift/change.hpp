#pragma once

#include <cstdio>
#include <optional>
#include <string>

#include "drift/error.hpp"
#include "drift/path.hpp"

namespace drift {

enum class ChangeStatus { Added, Modified, Deleted, Renamed };

inline const char* status_letter(ChangeStatus s) {
    switch (s) {
    case ChangeStatus::Added: return "A";
    case ChangeStatus::Modified: return "M";
    case ChangeStatus::Deleted: return "D";
    case ChangeStatus::Renamed: return "R";
    }
    return "?";
}

inline const char* status_word(ChangeStatus s) {
    switch (s) {
    case ChangeStatus::Added: return "ADDED";
    case ChangeStatus::Modified: return "MODIFIED";
    case ChangeStatus::Deleted: return "DELETED";
    case ChangeStatus::Renamed: return "RENAMED";
    }
    return "UNKNOWN";
}

// git's similarity score as it appears in name-status output: R085, R100.
inline std::string rename_code(int score) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "R%03d", score);
    return buf;
}

// One row of a window's change list. `path` is the Y-side path for A/M/R and
// the X-side path for D; `old_path` is set only for renames.
struct ChangeEntry {
    ChangeStatus status;
    NormalizedPath path;
    std::optional<NormalizedPath> old_path;
    std::optional<int> rename_score;
    std::optional<std::string> summary;

    static ChangeEntry added(NormalizedPath p) { return {ChangeStatus::Added, std::move(p), {}, {}, {}}; }
    static ChangeEntry modified(NormalizedPath p) { return {ChangeStatus::Modified, std::move(p), {}, {}, {}}; }
    static ChangeEntry deleted(NormalizedPath p) { return {ChangeStatus::Deleted, std::move(p), {}, {}, {}}; }
    static ChangeEntry renamed(NormalizedPath from, NormalizedPath to, int score) {
        if (from == to)
            throw Error("rename of '" + from.str() + "' onto itself");
        if (score < 0 || score > 100)
            throw Error("rename score out of range: " + std::to_string(score));
        return {ChangeStatus::Renamed, std::move(to), std::move(from), score, {}};
    }

    std::string status_code() const {
        return status == ChangeStatus::Renamed ? rename_code(rename_score.value_or(0)) : status_letter(status);
    }

    friend bool operator==(const ChangeEntry&, const ChangeEntry&) = default;
};

} // namespace drift
