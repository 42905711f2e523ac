#pragma once

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "muse/errors.hpp"
#include "muse/table.hpp"

namespace muse {

namespace detail {

// One parsed CSV record per inner vector; RFC-4180 quoting, LF or CRLF.
inline std::vector<std::vector<std::string>> parse_csv_records(
    const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field_started && field.empty()) {
                    in_quotes = true;
                    field_started = true;
                } else {
                    field += c;  // stray quote inside unquoted field
                }
                break;
            case ',':
                end_field();
                break;
            case '\r':
                if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
                end_record();
                break;
            case '\n':
                end_record();
                break;
            default:
                field += c;
                field_started = true;
        }
    }
    if (in_quotes) throw ParseError("unterminated quoted field at end of file");
    if (field_started || !field.empty() || !record.empty()) end_record();
    return records;
}

enum class NumericParse { Value, NotDecimal, NonFinite };

inline NumericParse parse_decimal(const std::string& s, double& out) {
    if (s.empty()) return NumericParse::NotDecimal;
    const char* begin = s.c_str();
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(begin, &end);
    if (end != begin + s.size()) return NumericParse::NotDecimal;
    if (!std::isfinite(v)) return NumericParse::NonFinite;
    for (char c : s) {
        if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '+' ||
              c == '-' || c == '.' || c == 'e' || c == 'E'))
            return NumericParse::NotDecimal;  // hex floats etc.
    }
    out = v;
    return NumericParse::Value;
}

inline std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

}  // namespace detail

/// Load a CSV file (header row required). With no schema, a column is
/// inferred Numeric when every non-empty cell parses as a finite decimal,
/// Categorical otherwise; an all-empty column is Categorical. Missing
/// values in numeric columns are rejected.
inline Table load_csv(const std::string& path,
                      std::optional<Schema> schema = std::nullopt) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    auto records = detail::parse_csv_records(buf.str());
    if (records.empty()) throw ParseError(path + ": missing header row");

    const std::vector<std::string>& header = records.front();
    const std::size_t m = header.size();
    const std::size_t n = records.size() - 1;

    auto cell_loc = [&](std::size_t i, std::size_t j) {
        return path + ": row " + std::to_string(i + 1) + ", column '" +
               header[j] + "'";
    };

    Schema s;
    if (schema) {
        s = *schema;
        if (s.size() != m)
            throw SchemaMismatch(path + ": header has " + std::to_string(m) +
                                 " columns, schema has " +
                                 std::to_string(s.size()));
        for (std::size_t j = 0; j < m; ++j)
            if (s.name(j) != header[j])
                throw SchemaMismatch(path + ": header column '" + header[j] +
                                     "' does not match schema column '" +
                                     s.name(j) + "'");
    } else {
        for (std::size_t j = 0; j < m; ++j) {
            bool numeric = false;
            for (std::size_t i = 0; i < n; ++i) {
                if (records[i + 1].size() != m) break;  // reported below
                const std::string& cell = records[i + 1][j];
                if (cell.empty()) continue;
                double v;
                if (detail::parse_decimal(cell, v) != detail::NumericParse::Value) {
                    numeric = false;
                    break;
                }
                numeric = true;
            }
            s.columns.emplace_back(header[j], numeric ? ColumnType::Numeric
                                                      : ColumnType::Categorical);
        }
    }

    std::vector<Row> rows;
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& rec = records[i + 1];
        if (rec.size() != m)
            throw ParseError(path + ": row " + std::to_string(i + 1) + " has " +
                             std::to_string(rec.size()) + " fields, expected " +
                             std::to_string(m));
        Row row;
        row.reserve(m);
        for (std::size_t j = 0; j < m; ++j) {
            if (s.type(j) == ColumnType::Numeric) {
                double v;
                switch (detail::parse_decimal(rec[j], v)) {
                    case detail::NumericParse::Value:
                        row.emplace_back(v);
                        break;
                    case detail::NumericParse::NonFinite:
                        throw NonFiniteValue(cell_loc(i, j) +
                                             ": non-finite value '" + rec[j] +
                                             "'");
                    case detail::NumericParse::NotDecimal:
                        throw ParseError(cell_loc(i, j) +
                                         ": cannot parse '" + rec[j] +
                                         "' as a number");
                }
            } else {
                row.emplace_back(rec[j]);
            }
        }
        rows.push_back(std::move(row));
    }
    return Table(std::move(s), std::move(rows));
}

/// Write a table as CSV with header; numeric cells in the canonical
/// 6-fractional-digit format.
inline void save_csv(const Table& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    const Schema& s = table.schema();
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (j) out << ',';
        out << detail::csv_quote(s.name(j));
    }
    out << '\n';
    for (const Row& row : table.rows()) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out << ',';
            if (is_numeric(row[j]))
                out << canonical_numeric(num(row[j]));
            else
                out << detail::csv_quote(cat(row[j]));
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

// Schema sidecar: JSON array of {"name": ..., "type": "numeric"|"categorical"}.
inline Schema schema_from_json(const nlohmann::json& j) {
    Schema s;
    for (const auto& col : j) {
        const std::string type = col.at("type").get<std::string>();
        if (type != "numeric" && type != "categorical")
            throw SchemaMismatch("unknown column type '" + type + "'");
        s.columns.emplace_back(col.at("name").get<std::string>(),
                               type == "numeric" ? ColumnType::Numeric
                                                 : ColumnType::Categorical);
    }
    s.validate();
    return s;
}

inline Schema load_schema(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return schema_from_json(j);
}

inline nlohmann::json schema_to_json(const Schema& s) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& [name, type] : s.columns)
        j.push_back({{"name", name}, {"type", to_string(type)}});
    return j;
}

}  // namespace muse
