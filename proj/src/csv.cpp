#include "branchscope/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "branchscope/error.hpp"

namespace branchscope::csv {

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw DataError("missing CSV column '" + std::string(name) + "'");
}

namespace {

void write_field(std::ostream& out, const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) {
    out << field;
    return;
  }
  out << '"';
  for (char c : field) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

void write_row(std::ostream& out, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ',';
    write_field(out, row[i]);
  }
  out << '\n';
}

}  // namespace

void write(std::ostream& out, const Table& table) {
  write_row(out, table.header);
  for (const auto& row : table.rows) write_row(out, row);
}

void write_file(const std::filesystem::path& path, const Table& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write(out, table);
  if (!out) throw DataError("failed writing " + path.string());
}

Table read(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  bool any = false;
  char c;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started && field.empty()) {
          quoted = true;
          field_started = true;
        } else {
          field += c;
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_field();
        records.push_back(std::move(record));
        record.clear();
        break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (quoted) throw DataError("unterminated quoted CSV field");
  if (any && (!record.empty() || !field.empty() || field_started)) {
    end_field();
    records.push_back(std::move(record));
  }
  Table table;
  if (records.empty()) return table;
  table.header = std::move(records.front());
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].size() != table.header.size()) {
      throw DataError("CSV row " + std::to_string(i + 1) + " has " + std::to_string(records[i].size()) +
                      " fields, expected " + std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(records[i]));
  }
  return table;
}

Table read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read(in);
}

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (value == 0.0) value = 0.0;  // drop negative zero
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

}  // namespace branchscope::csv
