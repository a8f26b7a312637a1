#include "bid/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bid {
namespace {

std::string location(const std::string& path, std::size_t line) {
  return path + ":" + std::to_string(line) + ": ";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

// Lines of the file with their 1-based numbers, comments and blanks dropped.
std::vector<std::pair<std::size_t, std::string>> read_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open file");
  std::vector<std::pair<std::size_t, std::string>> rows;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    rows.emplace_back(number, line);
  }
  return rows;
}

double parse_cell(const std::string& cell, const std::string& path,
                  std::size_t line, std::size_t column) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw std::runtime_error(location(path, line) + "column " +
                             std::to_string(column) + ": not a number: '" + cell + "'");
  }
  if (!std::isfinite(value)) {
    throw std::runtime_error(location(path, line) + "column " +
                             std::to_string(column) + ": non-finite value");
  }
  return value;
}

bool parses_as_number(const std::string& cell) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  (void)std::strtod(begin, &end);
  return end != begin && *end == '\0';
}

}  // namespace

DataMatrix load_alpha_matrix(const std::string& path) {
  const auto rows = read_rows(path);
  if (rows.size() < 2) {
    throw std::runtime_error(path + ": need a header row and at least one alpha row");
  }
  const auto header = split_csv(rows.front().second);
  if (header.size() < 2) {
    throw std::runtime_error(location(path, rows.front().first) +
                             "header must hold an id column plus date labels");
  }
  DataMatrix m;
  m.col_labels.assign(header.begin() + 1, header.end());
  const std::size_t width = m.col_labels.size();
  const std::size_t count = rows.size() - 1;
  m.values.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < count; ++r) {
    const auto& [line, text] = rows[r + 1];
    const auto cells = split_csv(text);
    if (cells.size() != width + 1) {
      throw std::runtime_error(location(path, line) + "expected " +
                               std::to_string(width + 1) + " cells, found " +
                               std::to_string(cells.size()));
    }
    m.row_labels.push_back(cells.front());
    for (std::size_t c = 0; c < width; ++c) {
      m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          parse_cell(cells[c + 1], path, line, c + 2);
    }
  }
  validate(m);
  return m;
}

PriceSeries load_prices(const std::string& path) {
  const auto rows = read_rows(path);
  if (rows.empty()) throw std::runtime_error(path + ": no price rows");
  PriceSeries p;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& [line, text] = rows[r];
    const auto cells = split_csv(text);
    if (cells.size() != 2) {
      throw std::runtime_error(location(path, line) + "expected date,close");
    }
    if (r == 0 && !parses_as_number(cells[1])) continue;
    p.dates.push_back(cells[0]);
    p.closes.push_back(parse_cell(cells[1], path, line, 2));
  }
  try {
    validate(p);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return p;
}

RawImportance load_importance(const std::string& path, std::size_t expected) {
  const auto rows = read_rows(path);
  RawImportance raw;
  for (const auto& [line, text] : rows) {
    raw.values.push_back(parse_cell(text, path, line, 1));
  }
  if (expected != 0 && raw.values.size() != expected) {
    throw std::runtime_error(path + ": expected " + std::to_string(expected) +
                             " importance values, found " +
                             std::to_string(raw.values.size()));
  }
  return raw;
}

std::string data_matrix_csv(const DataMatrix& m, const std::string& corner) {
  validate(m);
  std::string out = corner;
  for (const auto& label : m.col_labels) out += "," + label;
  out += "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out += m.row_labels[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out += "," + format_double(m.values(i, j));
    }
    out += "\n";
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << content;
  out.close();
  if (!out) throw std::runtime_error(path + ": write failed");
}

std::string format_double(double v) {
  char buf[40];
  for (int precision : {15, 16, 17}) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

}  // namespace bid
