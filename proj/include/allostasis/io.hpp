#pragma once

// CSV in RFC-4180 style: fields containing a comma, quote, CR or LF are
// quoted and embedded quotes doubled. Numbers use the shortest
// round-tripping decimal form so that output bytes are reproducible.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace allostasis::io {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string format_number(double v) {
    if (std::isnan(v)) return "";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string format_number(std::int64_t v) { return std::to_string(v); }

inline std::string format_optional(const std::optional<double>& v) { return v ? format_number(*v) : std::string{}; }

inline std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string csv_line(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += csv_escape(fields[i]);
    }
    out += '\n';
    return out;
}

// Splits a document into records; quoted fields may span lines.
inline std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"': quoted = true; any = true; break;
            case ',':
                row.push_back(std::move(field));
                field.clear();
                any = true;
                break;
            case '\r': break;
            case '\n':
                if (any || !field.empty()) {
                    row.push_back(std::move(field));
                    rows.push_back(std::move(row));
                }
                row.clear();
                field.clear();
                any = false;
                break;
            default: field += c; any = true;
        }
    }
    if (quoted) throw IoError("csv: unterminated quoted field");
    if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

// Header-indexed view over a parsed CSV document.
class CsvTable {
public:
    explicit CsvTable(std::string_view text) {
        auto rows = parse_csv(text);
        if (rows.empty()) throw IoError("csv: missing header row");
        header_ = std::move(rows.front());
        for (std::size_t i = 0; i < header_.size(); ++i) index_.emplace(header_[i], i);
        rows_.assign(std::make_move_iterator(rows.begin() + 1), std::make_move_iterator(rows.end()));
        for (std::size_t r = 0; r < rows_.size(); ++r)
            if (rows_[r].size() != header_.size())
                throw IoError("csv: row " + std::to_string(r + 2) + " has " + std::to_string(rows_[r].size()) +
                              " fields, header has " + std::to_string(header_.size()));
    }

    std::size_t size() const noexcept { return rows_.size(); }
    bool has(const std::string& column) const { return index_.count(column) != 0; }

    std::size_t column(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw IoError("csv: missing required column '" + name + "'");
        return it->second;
    }

    const std::string& at(std::size_t row, std::size_t col) const { return rows_[row][col]; }

    // Empty cell -> nullopt.
    std::optional<double> number(std::size_t row, std::size_t col) const {
        const auto& s = rows_[row][col];
        if (s.empty()) return std::nullopt;
        if (s == "inf") return INFINITY;
        if (s == "-inf") return -INFINITY;
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size())
            throw IoError("csv: row " + std::to_string(row + 2) + ", column '" + header_[col] +
                          "': not a number: '" + s + "'");
        return v;
    }

private:
    std::vector<std::string> header_;
    std::map<std::string, std::size_t> index_;
    std::vector<std::vector<std::string>> rows_;
};

inline void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace allostasis::io
