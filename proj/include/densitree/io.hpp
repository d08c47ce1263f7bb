#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "densitree/matrix.hpp"

namespace densitree {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line;  // source line of each row, 1-based
};

/// Comma-separated with a header row. Fields may be double-quoted; blank
/// lines are skipped. Errors name the offending line.
CsvTable read_csv(const std::filesystem::path& path);

struct NumericData {
  std::vector<std::string> names;
  Matrix values;
};

/// Every field must parse as a finite number.
NumericData to_numeric(const CsvTable& table, const std::string& source);
NumericData read_numeric_csv(const std::filesystem::path& path);

/// Integer labels from the last column of a CSV (the first column too when
/// it is the only one). "NA" reads as 0.
std::vector<int> read_labels(const std::filesystem::path& path);

/// 17 significant digits; Inf, -Inf and NA for non-finite values.
std::string format_double(double v);

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

}  // namespace densitree
