#include "gsdn/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace gsdn {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Tensor load_signals_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_signals_csv: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("load_signals_csv: ragged rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("load_signals_csv: empty file " + path);
  Tensor x(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < rows[r].size(); ++c) x(static_cast<int>(r), static_cast<int>(c)) = rows[r][c];
  return x;
}

void save_signals_csv(const Tensor& x, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_signals_csv: cannot open " + path);
  for (int r = 0; r < x.rows(); ++r) {
    for (int c = 0; c < x.cols(); ++c) {
      if (c) out << ",";
      out << format_double(x(r, c));
    }
    out << "\n";
  }
}

}  // namespace gsdn
