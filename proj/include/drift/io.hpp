#pragma once

#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "drift/error.hpp"

namespace drift {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

inline std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Writes to a sibling temp file and renames over the target, so readers
// never observe a partially written artifact.
inline void write_file_atomic(const fs::path& path, std::string_view content) {
    static std::atomic<unsigned> counter{0};
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out)
            throw Error("short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error("cannot rename " + tmp.string() + " -> " + path.string() + ": " + ec.message());
    }
}

// Splits on '\n'; a trailing newline does not produce an empty final line.
// A '\r' before the newline is dropped.
inline std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::size_t end = nl == std::string_view::npos ? text.size() : nl;
        std::string_view line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        lines.emplace_back(line);
        if (nl == std::string_view::npos)
            break;
        pos = nl + 1;
    }
    return lines;
}

inline std::vector<ordered_json> parse_jsonl(std::string_view text, const std::string& origin = "jsonl") {
    std::vector<ordered_json> records;
    std::size_t lineno = 0;
    for (const auto& line : split_lines(text)) {
        ++lineno;
        if (line.find_first_not_of(" \t") == std::string::npos)
            continue;
        try {
            records.push_back(ordered_json::parse(line));
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(lineno, origin + ": " + e.what());
        }
    }
    return records;
}

inline std::vector<ordered_json> read_jsonl(const fs::path& path) {
    return parse_jsonl(read_text_file(path), path.string());
}

inline std::string to_jsonl(const std::vector<ordered_json>& records) {
    std::string out;
    for (const auto& r : records) {
        out += r.dump();
        out += '\n';
    }
    return out;
}

// Finds the first balanced, well-formed JSON value opening with `open`
// ('[' or '{') anywhere in free text; string literals are honoured when
// matching brackets. Returns nullopt when no candidate parses.
inline std::optional<nlohmann::json> extract_first_json(std::string_view text, char open) {
    const char close = open == '[' ? ']' : '}';
    for (std::size_t start = text.find(open); start != std::string_view::npos; start = text.find(open, start + 1)) {
        int depth = 0;
        bool in_string = false;
        for (std::size_t i = start; i < text.size(); ++i) {
            char c = text[i];
            if (in_string) {
                if (c == '\\')
                    ++i;
                else if (c == '"')
                    in_string = false;
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '[' || c == '{') {
                ++depth;
            } else if (c == ']' || c == '}') {
                if (--depth == 0) {
                    if (c != close)
                        break;
                    auto parsed = nlohmann::json::parse(text.substr(start, i - start + 1), nullptr, false);
                    if (!parsed.is_discarded())
                        return parsed;
                    break;
                }
            }
        }
    }
    return std::nullopt;
}

inline std::string to_pretty_json(const ordered_json& j) {
    return j.dump(2) + "\n";
}

} // namespace drift
