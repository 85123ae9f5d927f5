#pragma once

// Numeric CSV tables with a one-line '#' header carrying the scenario hash and units.
//
//   # scenario=<hash> units: t[time] sup_ut[length/time] ...
//   t,sup_ut,...
//   0,0.4,...

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lmcf/errors.hpp"

namespace lmcf::io {

struct Column {
  std::string name;
  std::string unit;
};

struct Table {
  std::string scenario_hash;
  std::vector<Column> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (columns[c].name == name) return c;
    }
    throw IoError("missing column '" + name + "'");
  }
  std::vector<double> values(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
  }
};

/// Shortest text that reads back to the same double.
inline std::string format_number(double x) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

inline void write_table(const std::string& path, const Table& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "# scenario=" << t.scenario_hash << " units:";
  for (const auto& c : t.columns) out << ' ' << c.name << '[' << c.unit << ']';
  out << '\n';
  for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << t.columns[c].name;
  out << '\n';
  for (const auto& r : t.rows) {
    if (r.size() != t.columns.size()) throw IoError("row width mismatch writing " + path);
    for (std::size_t c = 0; c < r.size(); ++c) out << (c ? "," : "") << format_number(r[c]);
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

inline Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  Table t;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# scenario=", 0) != 0) throw IoError(path + ": missing '#' header line");
  {
    std::istringstream hs(line.substr(11));
    hs >> t.scenario_hash;
    std::string units, item;
    hs >> units;
    while (hs >> item) {
      const auto lb = item.find('[');
      if (lb == std::string::npos || item.back() != ']') throw IoError(path + ": malformed unit entry '" + item + "'");
      t.columns.push_back({item.substr(0, lb), item.substr(lb + 1, item.size() - lb - 2)});
    }
  }
  if (!std::getline(in, line)) throw IoError(path + ": missing column header");
  {
    std::istringstream cs(line);
    std::string name;
    std::size_t c = 0;
    while (std::getline(cs, name, ',')) {
      if (c >= t.columns.size() || t.columns[c].name != name) throw IoError(path + ": column header does not match units");
      ++c;
    }
    if (c != t.columns.size()) throw IoError(path + ": column header does not match units");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream rs(line);
    std::string cell;
    while (std::getline(rs, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0') throw IoError(path + ": bad number '" + cell + "'");
      row.push_back(v);
    }
    if (row.size() != t.columns.size()) throw IoError(path + ": row width mismatch");
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace lmcf::io
