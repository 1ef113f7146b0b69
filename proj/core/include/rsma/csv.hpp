#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace rsma::csv {

// "%.10g": stable text for byte-identical reruns.
std::string format_number(double v);
// Semicolon-separated list, used for per-user columns.
std::string join_numbers(const std::vector<double>& values);
std::vector<double> split_numbers(std::string_view field);

std::vector<std::string> split_line(std::string_view line);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column index by name, -1 when absent.
  int column(std::string_view name) const;
};

// Throws std::runtime_error on ragged rows.
Table read(std::istream& in);
void write(std::ostream& out, const Table& table);

}  // namespace rsma::csv
