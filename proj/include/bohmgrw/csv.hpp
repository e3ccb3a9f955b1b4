#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bohmgrw/error.hpp"
#include "bohmgrw/field.hpp"

namespace bohmgrw::csv {

/// Shortest round-trippable form with 17 significant digits.
inline std::string format(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using Cell = std::variant<double, long long, std::string>;

inline std::string render(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format(*d);
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

class Writer {
 public:
  Writer(std::ostream& out, std::initializer_list<std::string_view> header) : out_(out) {
    bool first = true;
    for (auto h : header) {
      out_ << (first ? "" : ",") << h;
      first = false;
    }
    out_ << '\n';
  }

  void row(std::initializer_list<Cell> cells) {
    bool first = true;
    for (const auto& c : cells) {
      out_ << (first ? "" : ",") << render(c);
      first = false;
    }
    out_ << '\n';
  }

 private:
  std::ostream& out_;
};

inline std::ofstream open(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  require(f.good(), Errc::invalid_argument, "cannot open " + path.string() + " for writing");
  return f;
}

/// Field snapshot: x,re,im,density per grid point.
inline void write_field(std::ostream& out, const ComplexField1D& psi) {
  Writer w(out, {"x", "re", "im", "density"});
  for (std::size_t i = 0; i < psi.size(); ++i)
    w.row({psi.grid().x(i), psi[i].real(), psi[i].imag(), std::norm(psi[i])});
}

inline void write_field(const std::filesystem::path& path, const ComplexField1D& psi) {
  auto f = open(path);
  write_field(f, psi);
}

/// Parses a snapshot written by write_field back into a field on `grid`.
inline ComplexField1D read_field(std::istream& in, const Grid1D& grid) {
  std::string line;
  std::getline(in, line);
  require(line == "x,re,im,density", Errc::config_parse, "unexpected field header: " + line);
  std::vector<cplx> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> cols;
    while (std::getline(ss, cell, ',')) cols.push_back(std::stod(cell));
    require(cols.size() == 4, Errc::config_parse, "field row needs 4 columns: " + line);
    values.emplace_back(cols[1], cols[2]);
  }
  return ComplexField1D(grid, std::move(values));
}

}  // namespace bohmgrw::csv
