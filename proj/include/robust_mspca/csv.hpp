#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "robust_mspca/spectral.hpp"

namespace robust_mspca::csv {

/// Raw cells of a comma-separated file. header is set when the first
/// non-empty row has no numeric cell.
struct Table {
  std::optional<std::vector<std::string>> header;
  std::vector<std::vector<std::string>> rows;
  /// 1-based line number of each entry of rows, for error messages.
  std::vector<std::size_t> line_numbers;
};

Table read_table(const std::filesystem::path& path);

/// Parses one cell as a finite real. Throws ParseError naming the location.
double parse_real(const std::string& cell, const std::filesystem::path& path,
                  std::size_t line, std::size_t column);

/// Reads a numeric matrix; a header row, if present, is skipped.
Matrix read_matrix(const std::filesystem::path& path);

/// Writes with 17 significant digits so values read back bit-exact.
void write_matrix(const std::filesystem::path& path, const Matrix& m);

/// Formats a real with 17 significant digits.
std::string format_real(double v);

}  // namespace robust_mspca::csv
