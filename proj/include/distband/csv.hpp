#pragma once

#include <algorithm>
#include <fstream>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "distband/samples.hpp"

namespace distband {

// Parsed CSV: header row plus string cells. Quoted fields with doubled-quote
// escapes and CRLF line ends are handled; everything stays UTF-8 bytes.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  }
};

inline CsvTable parse_csv(std::istream& in) {
  CsvTable table;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool any_char = false;

  const auto end_field = [&] {
    record.push_back(field);
    field.clear();
  };
  const auto end_record = [&] {
    end_field();
    if (table.header.empty()) {
      table.header = std::move(record);
    } else {
      table.rows.push_back(std::move(record));
    }
    record.clear();
    any_char = false;
  };

  char c;
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      any_char = true;
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        any_char = true;
        break;
      case ',':
        end_field();
        any_char = true;
        break;
      case '\r':
        break;
      case '\n':
        if (any_char || !field.empty() || !record.empty()) end_record();
        break;
      default:
        field.push_back(c);
        any_char = true;
        break;
    }
  }
  if (any_char || !field.empty() || !record.empty()) end_record();
  if (table.header.empty()) throw std::runtime_error("CSV file has no header row");
  return table;
}

// One optional row restriction, e.g. "married==1". Values compare numerically
// when both sides parse as numbers, as strings otherwise.
struct RowFilter {
  enum class Op { Eq, Ne, Le, Ge, Lt, Gt };
  std::string column;
  Op op = Op::Eq;
  std::string literal;

  bool keeps(const std::string& cell) const {
    const auto lhs = detail::parse_number(cell);
    const auto rhs = detail::parse_number(literal);
    int cmp;
    if (lhs && rhs) {
      cmp = *lhs < *rhs ? -1 : (*lhs > *rhs ? 1 : 0);
    } else {
      cmp = cell.compare(literal);
      cmp = cmp < 0 ? -1 : (cmp > 0 ? 1 : 0);
    }
    switch (op) {
      case Op::Eq: return cmp == 0;
      case Op::Ne: return cmp != 0;
      case Op::Le: return cmp <= 0;
      case Op::Ge: return cmp >= 0;
      case Op::Lt: return cmp < 0;
      case Op::Gt: return cmp > 0;
    }
    return false;
  }
};

// Parses "<column><op><value>" with op one of ==, !=, <=, >=, <, >.
inline RowFilter parse_filter(const std::string& expr) {
  struct OpToken {
    const char* text;
    RowFilter::Op op;
  };
  static constexpr OpToken tokens[] = {
      {"==", RowFilter::Op::Eq}, {"!=", RowFilter::Op::Ne}, {"<=", RowFilter::Op::Le},
      {">=", RowFilter::Op::Ge}, {"<", RowFilter::Op::Lt},  {">", RowFilter::Op::Gt},
  };
  std::size_t best_pos = std::string::npos;
  const OpToken* best = nullptr;
  for (const auto& token : tokens) {
    const auto pos = expr.find(token.text);
    if (pos != std::string::npos &&
        (pos < best_pos ||
         (pos == best_pos && std::string(token.text).size() > std::string(best->text).size()))) {
      best_pos = pos;
      best = &token;
    }
  }
  if (best == nullptr || best_pos == 0) {
    throw std::runtime_error("invalid filter '" + expr +
                             "': expected <column><op><value> with op one of == != <= >= < >");
  }
  RowFilter filter;
  filter.column = expr.substr(0, best_pos);
  filter.op = best->op;
  filter.literal = expr.substr(best_pos + std::string(best->text).size());
  return filter;
}

// Loads the two groups from a CSV file. Rows failing the filter or with
// unparseable/empty value cells are dropped and counted.
inline GroupedSamples read_csv(const std::string& path, const std::string& value_col,
                               const std::string& group_col,
                               const std::optional<RowFilter>& filter = std::nullopt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open data file: " + path);
  const CsvTable table = parse_csv(in);

  const auto value_idx = table.column(value_col);
  if (!value_idx) throw std::runtime_error("column '" + value_col + "' not found in " + path);
  const auto group_idx = table.column(group_col);
  if (!group_idx) throw std::runtime_error("column '" + group_col + "' not found in " + path);
  std::optional<std::size_t> filter_idx;
  if (filter) {
    filter_idx = table.column(filter->column);
    if (!filter_idx) {
      throw std::runtime_error("filter column '" + filter->column + "' not found in " + path);
    }
  }

  const auto cell = [](const std::vector<std::string>& row, std::size_t idx) {
    return idx < row.size() ? row[idx] : std::string{};
  };

  std::vector<LabeledValue> rows;
  rows.reserve(table.rows.size());
  std::int64_t filtered_out = 0;
  for (const auto& row : table.rows) {
    if (filter && !filter->keeps(cell(row, *filter_idx))) {
      ++filtered_out;
      continue;
    }
    rows.push_back({detail::parse_number(cell(row, *value_idx)), cell(row, *group_idx)});
  }
  GroupedSamples g = load_grouped(rows);
  g.n_dropped += filtered_out;
  return g;
}

}  // namespace distband
