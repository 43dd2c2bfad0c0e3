#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace gridmix::csv {

// A parsed comma-separated table. Rows are addressed by their 1-based data
// index (header excluded), which is what error messages report.
struct Table {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Throws InputError if the header does not match exactly.
  void require_header(const std::vector<std::string>& expected) const;
  std::size_t column(std::string_view name) const;
};

// Reads a whole file. Supports double-quoted fields with "" escapes; blank
// lines are skipped; every row must have the header's field count.
Table read(const std::filesystem::path& path);
Table parse(std::string_view text, std::string source);

double parse_double(std::string_view text, const Table& table, std::size_t row,
                    std::string_view field);
long long parse_integer(std::string_view text, const Table& table,
                        std::size_t row, std::string_view field);

// Shortest text that round-trips to the same double.
std::string format_double(double value);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace gridmix::csv
