#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace ucbmo {

// CSV export/import for experiment results. Two fixed schemas:
//   raw:       variant,run,episode,per,cum_regret
//   aggregate: variant,episode,mean_per,ci_half_width,mean_cum_regret
// Runs are 0-based (matching the run-index stream ids), episodes 1-based
// (matching the k = 1..K convention). Doubles are written in the shortest
// form that parses back to the identical bit pattern, so export followed by
// import is lossless. Fields are comma-free by construction; no quoting.

inline std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) throw std::logic_error("format_double: buffer too small");
    return std::string(buf, ptr);
}

struct RawRow {
    std::string variant;
    long long run = 0;
    long long episode = 0;
    double per = 0.0;
    double cum_regret = 0.0;
};

struct AggregateRow {
    std::string variant;
    long long episode = 0;
    double mean_per = 0.0;
    double ci_half_width = 0.0;
    double mean_cum_regret = 0.0;
};

inline constexpr std::string_view kRawCsvHeader = "variant,run,episode,per,cum_regret";
inline constexpr std::string_view kAggregateCsvHeader =
    "variant,episode,mean_per,ci_half_width,mean_cum_regret";

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

inline double parse_csv_double(std::string_view text, std::size_t line_no) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw std::runtime_error("csv line " + std::to_string(line_no) + ": bad number '" +
                                 std::string(text) + "'");
    return value;
}

inline long long parse_csv_int(std::string_view text, std::size_t line_no) {
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw std::runtime_error("csv line " + std::to_string(line_no) + ": bad integer '" +
                                 std::string(text) + "'");
    return value;
}

/// Splits into lines, tolerating a trailing newline and CR-LF endings.
inline std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t nl = text.find('\n', start);
        std::string_view line =
            text.substr(start, nl == std::string_view::npos ? nl : nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return lines;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

inline void write_text_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace detail

inline void write_raw_csv(std::ostream& out, const std::vector<RawRow>& rows) {
    out << kRawCsvHeader << '\n';
    for (const RawRow& row : rows) {
        out << row.variant << ',' << row.run << ',' << row.episode << ','
            << format_double(row.per) << ',' << format_double(row.cum_regret) << '\n';
    }
}

inline void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
    out << kAggregateCsvHeader << '\n';
    for (const AggregateRow& row : rows) {
        out << row.variant << ',' << row.episode << ',' << format_double(row.mean_per) << ','
            << format_double(row.ci_half_width) << ',' << format_double(row.mean_cum_regret)
            << '\n';
    }
}

inline void save_raw_csv(const std::string& path, const std::vector<RawRow>& rows) {
    std::ostringstream buf;
    write_raw_csv(buf, rows);
    detail::write_text_file(path, buf.str());
}

inline void save_aggregate_csv(const std::string& path, const std::vector<AggregateRow>& rows) {
    std::ostringstream buf;
    write_aggregate_csv(buf, rows);
    detail::write_text_file(path, buf.str());
}

inline std::vector<RawRow> parse_raw_csv(std::string_view text) {
    const auto lines = detail::split_lines(text);
    if (lines.empty() || lines[0] != kRawCsvHeader)
        throw std::runtime_error("raw csv: missing or wrong header (expected '" +
                                 std::string(kRawCsvHeader) + "')");
    std::vector<RawRow> rows;
    rows.reserve(lines.size() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = detail::split_fields(lines[i]);
        if (fields.size() != 5)
            throw std::runtime_error("raw csv line " + std::to_string(i + 1) + ": expected 5 " +
                                     "fields, got " + std::to_string(fields.size()));
        RawRow row;
        row.variant = std::string(fields[0]);
        row.run = detail::parse_csv_int(fields[1], i + 1);
        row.episode = detail::parse_csv_int(fields[2], i + 1);
        row.per = detail::parse_csv_double(fields[3], i + 1);
        row.cum_regret = detail::parse_csv_double(fields[4], i + 1);
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::vector<AggregateRow> parse_aggregate_csv(std::string_view text) {
    const auto lines = detail::split_lines(text);
    if (lines.empty() || lines[0] != kAggregateCsvHeader)
        throw std::runtime_error("aggregate csv: missing or wrong header (expected '" +
                                 std::string(kAggregateCsvHeader) + "')");
    std::vector<AggregateRow> rows;
    rows.reserve(lines.size() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = detail::split_fields(lines[i]);
        if (fields.size() != 5)
            throw std::runtime_error("aggregate csv line " + std::to_string(i + 1) +
                                     ": expected 5 fields, got " + std::to_string(fields.size()));
        AggregateRow row;
        row.variant = std::string(fields[0]);
        row.episode = detail::parse_csv_int(fields[1], i + 1);
        row.mean_per = detail::parse_csv_double(fields[2], i + 1);
        row.ci_half_width = detail::parse_csv_double(fields[3], i + 1);
        row.mean_cum_regret = detail::parse_csv_double(fields[4], i + 1);
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::vector<RawRow> load_raw_csv(const std::string& path) {
    return parse_raw_csv(detail::read_text_file(path));
}

inline std::vector<AggregateRow> load_aggregate_csv(const std::string& path) {
    return parse_aggregate_csv(detail::read_text_file(path));
}

}  // namespace ucbmo
