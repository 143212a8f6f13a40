#include "robust_mspca/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "robust_mspca/errors.hpp"

namespace robust_mspca::csv {
namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
      cell.push_back(c);
    } else if (c == ',' && !quoted) {
      cells.push_back(trim(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.push_back(trim(cell));
  return cells;
}

bool looks_numeric(const std::string& cell) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  return res.ec == std::errc() && res.ptr == last && first != last;
}

}  // namespace

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "'");
  }
  Table table;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
      line.erase(0, 3);
    }
    if (trim(line).empty()) continue;
    auto cells = split_row(line);
    if (first) {
      first = false;
      const bool any_numeric =
          std::any_of(cells.begin(), cells.end(), looks_numeric);
      if (!any_numeric) {
        table.header = std::move(cells);
        continue;
      }
    }
    table.rows.push_back(std::move(cells));
    table.line_numbers.push_back(line_no);
  }
  if (in.bad()) {
    throw Error(ErrorKind::IoError, "read failure on '" + path.string() + "'");
  }
  return table;
}

double parse_real(const std::string& cell, const std::filesystem::path& path,
                  std::size_t line, std::size_t column) {
  const auto where = [&] {
    return path.string() + " row " + std::to_string(line) + ", column " +
           std::to_string(column);
  };
  if (!looks_numeric(cell)) {
    throw Error(ErrorKind::ParseError,
                "non-numeric cell '" + cell + "' at " + where());
  }
  double v = 0.0;
  const char* first = cell.data();
  if (*first == '+') ++first;
  std::from_chars(first, cell.data() + cell.size(), v);
  if (!std::isfinite(v)) {
    throw Error(ErrorKind::ParseError,
                "non-finite cell '" + cell + "' at " + where());
  }
  return v;
}

Matrix read_matrix(const std::filesystem::path& path) {
  const Table table = read_table(path);
  if (table.rows.empty()) {
    throw Error(ErrorKind::ShapeError, "'" + path.string() + "' has no data rows");
  }
  const std::size_t cols = table.rows.front().size();
  Matrix m(static_cast<Index>(table.rows.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != cols) {
      throw Error(ErrorKind::ShapeError,
                  path.string() + " row " +
                      std::to_string(table.line_numbers[r]) + " has " +
                      std::to_string(row.size()) + " columns, expected " +
                      std::to_string(cols));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Index>(r), static_cast<Index>(c)) =
          parse_real(row[c], path, table.line_numbers[r], c + 1);
    }
  }
  return m;
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw Error(ErrorKind::IoError, "cannot write '" + path.string() + "'");
  }
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_real(m(i, j));
    }
    out << '\n';
  }
  if (!out) {
    throw Error(ErrorKind::IoError, "write failure on '" + path.string() + "'");
  }
}

}  // namespace robust_mspca::csv
