#pragma once

#include <istream>
#include <map>
#include <string>
#include <vector>

#include "avr/core/errors.hpp"

namespace avr::eval {

using CsvRow = std::vector<std::string>;

/// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF.
inline std::vector<CsvRow> read_csv(std::istream& is) {
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  bool quoted = false;
  bool any = false;
  char c;
  while (is.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (is.peek() == '"') {
          is.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && is.peek() == '\n') is.get(c);
      row.push_back(std::move(field));
      field.clear();
      if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else {
      field += c;
    }
  }
  if (quoted) throw SchemaError("csv: unterminated quoted field");
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// Header row to column index.
inline std::map<std::string, std::size_t> csv_columns(const CsvRow& header) {
  std::map<std::string, std::size_t> cols;
  for (std::size_t i = 0; i < header.size(); ++i) cols[header[i]] = i;
  return cols;
}

/// Numeric column by name; every data row must parse.
inline std::vector<double> csv_numeric_column(const std::vector<CsvRow>& rows, const std::string& name) {
  if (rows.empty()) throw SchemaError("csv: empty file");
  const auto cols = csv_columns(rows[0]);
  const auto it = cols.find(name);
  if (it == cols.end()) throw SchemaError("csv: no column '" + name + "'");
  std::vector<double> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (it->second >= rows[r].size()) throw SchemaError("csv: row " + std::to_string(r) + " is short");
    const std::string& s = rows[r][it->second];
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) {
      throw SchemaError("csv: row " + std::to_string(r) + " column '" + name + "' is not numeric: '" + s + "'");
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace avr::eval
