#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "drift/error.hpp"

namespace drift {

// Root-relative, '/'-separated path: nonempty, no leading '/' or './',
// no '.' or '..' segments, no empty segments, no trailing slash.
// Only normalize_path() constructs one.
class NormalizedPath {
public:
    const std::string& str() const noexcept { return value_; }
    operator std::string_view() const noexcept { return value_; }

    std::string_view basename() const noexcept {
        auto slash = value_.rfind('/');
        return slash == std::string::npos ? std::string_view(value_) : std::string_view(value_).substr(slash + 1);
    }

    friend auto operator<=>(const NormalizedPath&, const NormalizedPath&) = default;
    friend bool operator==(const NormalizedPath&, const NormalizedPath&) = default;

    friend std::ostream& operator<<(std::ostream& os, const NormalizedPath& p) { return os << p.value_; }

private:
    explicit NormalizedPath(std::string v) : value_(std::move(v)) {}
    friend std::optional<NormalizedPath> normalize_path(std::string_view raw);

    std::string value_;
};

inline std::optional<NormalizedPath> normalize_path(std::string_view raw) {
    std::string unified(raw);
    for (char& c : unified)
        if (c == '\\')
            c = '/';

    std::vector<std::string_view> segments;
    std::string_view rest(unified);
    while (!rest.empty()) {
        auto slash = rest.find('/');
        std::string_view seg = rest.substr(0, slash);
        rest = slash == std::string_view::npos ? std::string_view{} : rest.substr(slash + 1);
        if (seg.empty() || seg == ".")
            continue;
        if (seg == "..")
            return std::nullopt;
        segments.push_back(seg);
    }
    if (segments.empty())
        return std::nullopt;

    std::string out;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (i)
            out += '/';
        out += segments[i];
    }
    return NormalizedPath(std::move(out));
}

// For inputs the caller has already validated; throws on anything normalize_path rejects.
inline NormalizedPath require_path(std::string_view raw) {
    auto p = normalize_path(raw);
    if (!p)
        throw Error("invalid path: '" + std::string(raw) + "'");
    return *p;
}

inline bool is_valid_utf8(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        auto c = static_cast<unsigned char>(s[i]);
        std::size_t len;
        char32_t cp;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + len > s.size())
            return false;
        for (std::size_t k = 1; k < len; ++k) {
            auto cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xC0) != 0x80)
                return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        // overlong forms, surrogates, out of range
        if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
            (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF)
            return false;
        i += len;
    }
    return true;
}

// Undoes git's core.quotepath C-style quoting ("a\tb", "\303\251"). Unquoted
// input is returned unchanged; a malformed quoted string yields nullopt.
inline std::optional<std::string> unquote_git_path(std::string_view field) {
    if (field.empty() || field.front() != '"')
        return std::string(field);
    if (field.size() < 2 || field.back() != '"')
        return std::nullopt; // git quotes whole names, so a lone leading quote is malformed
    std::string out;
    std::string_view body = field.substr(1, field.size() - 2);
    for (std::size_t i = 0; i < body.size(); ++i) {
        char c = body[i];
        if (c != '\\') {
            out += c;
            continue;
        }
        if (++i >= body.size())
            return std::nullopt;
        char e = body[i];
        switch (e) {
        case 'a': out += '\a'; break;
        case 'b': out += '\b'; break;
        case 't': out += '\t'; break;
        case 'n': out += '\n'; break;
        case 'v': out += '\v'; break;
        case 'f': out += '\f'; break;
        case 'r': out += '\r'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default:
            if (e >= '0' && e <= '3' && i + 2 < body.size() && body[i + 1] >= '0' && body[i + 1] <= '7' &&
                body[i + 2] >= '0' && body[i + 2] <= '7') {
                int v = (e - '0') * 64 + (body[i + 1] - '0') * 8 + (body[i + 2] - '0');
                out += static_cast<char>(v);
                i += 2;
            } else {
                return std::nullopt;
            }
        }
    }
    return out;
}

} // namespace drift

template <>
struct std::hash<drift::NormalizedPath> {
    std::size_t operator()(const drift::NormalizedPath& p) const noexcept { return std::hash<std::string>{}(p.str()); }
};
