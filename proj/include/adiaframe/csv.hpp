#pragma once

#include <string>
#include <vector>

namespace adiaframe {

/// Numeric table with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row);
  /// Column index by name; throws ValidationError when absent.
  std::size_t column(const std::string& name) const;
};

/// Shortest decimal that reads back to the same double.
std::string format_double(double v);

std::string to_csv(const CsvTable& table);
void write_csv(const std::string& path, const CsvTable& table);

/// Parses text produced by to_csv (or any comma-separated numeric table with a header).
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::string& path);

/// Whole-file helpers shared by the CLI.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace adiaframe
