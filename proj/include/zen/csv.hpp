#pragma once

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace zen {

/// Raised for malformed or invalid input data.
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Comma-separated table with a header row. Cells are kept as text.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column, or npos.
  std::size_t column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

/// Parses a numeric cell. `row` is the 1-based data row, `col` the column name;
/// both end up in the error message.
double parse_cell(std::string_view text, std::size_t row, std::string_view col);

/// Shortest decimal text that reads back to the identical double.
std::string format_double(double v);

/// Opens `path` for writing, creating parent directories; throws on failure.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace zen
