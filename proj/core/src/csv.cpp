#include "rsma/csv.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace rsma::csv {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string join_numbers(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ';';
    out += format_number(values[i]);
  }
  return out;
}

std::vector<double> split_numbers(std::string_view field) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= field.size() && !field.empty()) {
    const auto end = field.find(';', start);
    const auto token = field.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    out.push_back(std::stod(std::string(token)));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto end = line.find(',', start);
    if (end == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

int Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

Table read(std::istream& in) {
  Table t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_line(line);
    if (first) {
      t.header = std::move(fields);
      first = false;
      continue;
    }
    if (fields.size() != t.header.size()) throw std::runtime_error("csv: row width differs from header");
    t.rows.push_back(std::move(fields));
  }
  return t;
}

void write(std::ostream& out, const Table& table) {
  auto emit = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i > 0) out << ',';
      out << fields[i];
    }
    out << '\n';
  };
  emit(table.header);
  for (const auto& r : table.rows) emit(r);
}

}  // namespace rsma::csv
