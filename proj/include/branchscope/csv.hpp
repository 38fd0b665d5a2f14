#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace branchscope::csv {

// A header row plus string cells. Every CSV the project writes goes through this
// type so that reading a file back yields the same table.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column; throws DataError when absent.
  std::size_t column(std::string_view name) const;

  bool operator==(const Table&) const = default;
};

// RFC-4180 writer: fields containing comma, quote, CR or LF are quoted, quotes doubled.
void write(std::ostream& out, const Table& table);
void write_file(const std::filesystem::path& path, const Table& table);

Table read(std::istream& in);
Table read_file(const std::filesystem::path& path);

// Six significant digits, '.' decimal separator, locale independent.
std::string format_real(double value);

}  // namespace branchscope::csv
