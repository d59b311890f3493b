#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "drift/io.hpp"

namespace drift {

enum class ReportFormat { Json, Csv, Markdown };

inline ReportFormat parse_report_format(const std::string& s) {
    if (s == "json")
        return ReportFormat::Json;
    if (s == "csv")
        return ReportFormat::Csv;
    if (s == "md" || s == "markdown")
        return ReportFormat::Markdown;
    throw Error("unknown report format '" + s + "' (expected json, csv or md)");
}

inline std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

// Signed delta; magnitudes that round to zero print as "+0.000…".
inline std::string signed_delta(double d, int decimals = 4) {
    if (std::fabs(d) < 0.5 * std::pow(10.0, -decimals))
        d = 0.0;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%+.*f", decimals, d);
    return buf;
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string csv_row(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i)
        out += (i ? "," : "") + csv_field(fields[i]);
    return out + "\r\n";
}

inline std::string md_row(const std::vector<std::string>& cells) {
    std::string out = "|";
    for (const auto& c : cells)
        out += " " + c + " |";
    return out + "\n";
}

inline std::string md_rule(std::size_t n) {
    std::string out = "|";
    for (std::size_t i = 0; i < n; ++i)
        out += " --- |";
    return out + "\n";
}

inline bool is_probe_report(const ordered_json& r) { return r.contains("counts") && r.contains("emission_rate"); }

struct ReportLabels {
    std::string variant = "variant";
    std::string base = "base";
};

namespace detail {

inline std::string metric(const ordered_json& v, int decimals) { return v.is_null() ? "n/a" : fixed(v.get<double>(), decimals); }

inline std::string delta(const ordered_json& v, const ordered_json& b) {
    if (v.is_null() || b.is_null())
        return "n/a";
    return signed_delta(v.get<double>() - b.get<double>());
}

inline std::vector<std::pair<std::string, const ordered_json*>> eval_rows(const ordered_json& r) {
    std::vector<std::pair<std::string, const ordered_json*>> rows{{"ALL", &r}};
    for (const auto& [name, slice] : r.at("per_slice").items())
        rows.emplace_back(name, &slice);
    return rows;
}

inline std::string render_eval_md(const ordered_json& r, const std::optional<ordered_json>& base, const ReportLabels& labels) {
    std::string out;
    if (base) {
        out += md_row({"Variant", "EM", "MR", "ΔEM", "ΔMR"}) + md_rule(5);
        out += md_row({labels.base, metric(base->at("em"), 4), metric(base->at("mr"), 4), signed_delta(0.0), signed_delta(0.0)});
        out += md_row({labels.variant, metric(r.at("em"), 4), metric(r.at("mr"), 4), delta(r.at("em"), base->at("em")),
                       delta(r.at("mr"), base->at("mr"))});
    } else {
        out += md_row({"Variant", "EM", "MR"}) + md_rule(3);
        out += md_row({labels.variant, metric(r.at("em"), 4), metric(r.at("mr"), 4)});
    }
    out += "\n" + md_row({"Slice", "n", "EM", "MR"}) + md_rule(4);
    for (const auto& [name, slice] : r.at("per_slice").items())
        out += md_row({name, std::to_string(slice.at("n").get<std::size_t>()), metric(slice.at("em"), 4), metric(slice.at("mr"), 4)});
    out += "\n" + md_row({"Reason", "Count"}) + md_rule(2);
    for (const auto& [name, count] : r.at("reason_counts").items())
        out += md_row({name, std::to_string(count.get<std::size_t>())});
    return out;
}

inline std::string render_eval_csv(const ordered_json& r, const std::optional<ordered_json>& base, const ReportLabels& labels) {
    std::vector<std::string> header{"variant", "slice", "n", "em", "mr"};
    if (base) {
        header.push_back("delta_em");
        header.push_back("delta_mr");
    }
    std::string out = csv_row(header);
    auto emit = [&](const std::string& label, const ordered_json& rep, const ordered_json* ref) {
        auto base_rows = ref ? eval_rows(*ref) : std::vector<std::pair<std::string, const ordered_json*>>{};
        auto rows = eval_rows(rep);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& [slice, stats] = rows[i];
            std::vector<std::string> fields{label, slice, std::to_string(stats->at("n").get<std::size_t>()), metric(stats->at("em"), 4),
                                            metric(stats->at("mr"), 4)};
            if (base) {
                const ordered_json* b = i < base_rows.size() ? base_rows[i].second : stats;
                fields.push_back(delta(stats->at("em"), b->at("em")));
                fields.push_back(delta(stats->at("mr"), b->at("mr")));
            }
            out += csv_row(fields);
        }
    };
    if (base)
        emit(labels.base, *base, &*base);
    emit(labels.variant, r, base ? &*base : nullptr);
    return out;
}

inline std::vector<std::string> probe_cells(const std::string& label, const ordered_json& r, int decimals) {
    const auto& c = r.at("counts");
    return {label,
            std::to_string(c.at("old_name").get<std::size_t>()),
            std::to_string(c.at("new_name").get<std::size_t>()),
            std::to_string(c.at("deleted_old").get<std::size_t>()),
            std::to_string(c.at("unknown").get<std::size_t>()),
            fixed(r.at("emission_rate").get<double>(), decimals),
            fixed(r.at("old_em").get<double>(), decimals),
            fixed(r.at("old_mr").get<double>(), decimals)};
}

} // namespace detail

// Renders an eval or probe report. A base report adds the delta columns.
inline std::string render_report(const ordered_json& report, ReportFormat format, const std::optional<ordered_json>& base = std::nullopt,
                                 const ReportLabels& labels = {}) {
    if (format == ReportFormat::Json)
        return to_pretty_json(report);
    if (is_probe_report(report)) {
        std::vector<std::string> header{"Variant", "old_name", "new_name", "deleted_old", "unknown", "emission_rate", "old_em", "old_mr"};
        if (format == ReportFormat::Csv) {
            for (auto& h : header)
                h[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(h[0])));
            std::string out = csv_row(header);
            if (base)
                out += csv_row(detail::probe_cells(labels.base, *base, 4));
            return out + csv_row(detail::probe_cells(labels.variant, report, 4));
        }
        std::string out = md_row(header) + md_rule(header.size());
        if (base)
            out += md_row(detail::probe_cells(labels.base, *base, 2));
        return out + md_row(detail::probe_cells(labels.variant, report, 2));
    }
    if (format == ReportFormat::Csv)
        return detail::render_eval_csv(report, base, labels);
    return detail::render_eval_md(report, base, labels);
}

} // namespace drift
