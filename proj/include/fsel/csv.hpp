#pragma once

// Minimal numeric CSV: one header row of column names, then rectangular rows
// of numbers. Blank lines and lines starting with '#' are skipped. Numbers are parsed with std::from_chars, so the C locale is the
// only accepted spelling (no decimal commas, no thousands separators).

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <unistd.h>

#include "fsel/numcore.hpp"

namespace fsel {

struct CsvTable {
    std::vector<std::string> header;
    Matrix values;

    Index column(std::string_view name) const {
        for (std::size_t k = 0; k < header.size(); ++k) {
            if (header[k] == name) return static_cast<Index>(k);
        }
        return -1;
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace detail

inline double parse_cell(std::string_view field, std::size_t line, std::size_t col) {
    std::string_view s = field;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double value = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() ||
        !std::isfinite(value)) {
        fail(ErrorKind::Parse, "line " + std::to_string(line) + ", column " +
                                   std::to_string(col + 1) + ": cannot parse '" +
                                   std::string(field) + "' as a number");
    }
    return value;
}

inline CsvTable parse_csv(std::string_view text) {
    CsvTable table;
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const std::size_t eol = text.find('\n');
        const std::string_view raw = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++line_no;
        const std::string_view trimmed = detail::trim(raw);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        auto fields = detail::split_fields(raw);
        if (table.header.empty()) {
            for (auto f : fields) {
                if (f.size() >= 2 && f.front() == '"' && f.back() == '"') f = f.substr(1, f.size() - 2);
                if (f.empty()) {
                    fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": empty column name");
                }
                table.header.emplace_back(f);
            }
            continue;
        }
        if (fields.size() != table.header.size()) {
            fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected " +
                                       std::to_string(table.header.size()) + " fields, found " +
                                       std::to_string(fields.size()));
        }
        std::vector<double> row(fields.size());
        for (std::size_t k = 0; k < fields.size(); ++k) row[k] = parse_cell(fields[k], line_no, k);
        rows.push_back(std::move(row));
    }
    if (table.header.empty()) fail(ErrorKind::Parse, "input has no header row");
    table.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(table.header.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t k = 0; k < rows[i].size(); ++k) {
            table.values(static_cast<Index>(i), static_cast<Index>(k)) = rows[i][k];
        }
    }
    return table;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::InvalidArgument, "cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline CsvTable read_csv(const std::filesystem::path& path) {
    return parse_csv(read_file(path));
}

inline std::string format_cell(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string emit_csv(const CsvTable& table) {
    std::string out;
    for (std::size_t k = 0; k < table.header.size(); ++k) {
        if (k) out += ',';
        out += table.header[k];
    }
    out += '\n';
    for (Index i = 0; i < table.values.rows(); ++i) {
        for (Index k = 0; k < table.values.cols(); ++k) {
            if (k) out += ',';
            out += format_cell(table.values(i, k));
        }
        out += '\n';
    }
    return out;
}

// Writes to a sibling temporary and renames it over the target, so readers
// never observe a partial file.
inline void write_atomic(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::InvalidArgument, "cannot write '" + tmp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            fail(ErrorKind::InvalidArgument, "write to '" + tmp.string() + "' failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        fail(ErrorKind::InvalidArgument, "cannot move output into '" + path.string() + "'");
    }
}

}  // namespace fsel
