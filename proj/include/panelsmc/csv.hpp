#ifndef PANELSMC_CSV_HPP
#define PANELSMC_CSV_HPP

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace panelsmc::csv {

/// Splits one comma-separated line, trimming surrounding whitespace.
/// No quoting: field values here are labels and numbers.
inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

/// Shortest round-trip decimal form, locale-independent.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t' || s[pos] == '\r')) ++pos;
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(context + ": cannot parse number '" + s + "'");
  }
}

/// Fully parsed CSV file with a required header row.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
  int require_column(const std::string& name, const std::string& context) const {
    const int i = column(name);
    if (i < 0) throw std::runtime_error(context + ": missing column '" + name + "'");
    return i;
  }
};

inline Table read_table(std::istream& is, const std::string& context) {
  Table t;
  std::string line;
  bool saw_header = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto f = split_line(line);
    if (!saw_header) {
      t.header = std::move(f);
      saw_header = true;
    } else {
      if (f.size() != t.header.size())
        throw std::runtime_error(context + ": row has " + std::to_string(f.size()) +
                                 " fields, header has " + std::to_string(t.header.size()));
      t.rows.push_back(std::move(f));
    }
  }
  if (!saw_header) throw std::runtime_error(context + ": empty file (header row required)");
  return t;
}

inline Table read_table(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return read_table(is, path);
}

}  // namespace panelsmc::csv

#endif  // PANELSMC_CSV_HPP
