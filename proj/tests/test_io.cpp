#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "bid/io.hpp"
#include "bid/rng.hpp"

using namespace bid;
namespace fs = std::filesystem;

namespace {

// Fresh scratch file path under the system temp directory.
std::string scratch_file(const std::string& name) {
  static int counter = 0;
  const fs::path dir = fs::temp_directory_path() / "bid_io_tests";
  fs::create_directories(dir);
  return (dir / (std::to_string(counter++) + "_" + name)).string();
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("alpha matrix loads with labels and skips comments") {
  const std::string path = scratch_file("alphas.csv");
  write_text_file(path,
                  "# generated panel\n"
                  "alpha,2024-01-02,2024-01-03,2024-01-04\n"
                  "alpha_00,1.5,-2.25,0.125\n"
                  "# mid-file note\n"
                  "alpha_01,3.0,4.5,-6.0\n");
  const DataMatrix m = load_alpha_matrix(path);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m.row_labels == std::vector<std::string>{"alpha_00", "alpha_01"});
  CHECK(m.col_labels == std::vector<std::string>{"2024-01-02", "2024-01-03", "2024-01-04"});
  CHECK(m.values(0, 1) == -2.25);
  CHECK(m.values(1, 2) == -6.0);
}

TEST_CASE("written matrix reloads bitwise equal") {
  RngStream rng(2024);
  DataMatrix m;
  m.values.resize(7, 9);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      // Mix magnitudes so short and long decimal forms both appear.
      const double scale = std::pow(10.0, static_cast<double>(j) - 4.0);
      m.values(i, j) = rng.next_normal() * scale;
    }
  }
  m.values(0, 0) = 1.0 / 3.0;
  m.values(1, 1) = 0.1;
  m.values(2, 2) = 1e-300;
  m.values(3, 3) = 12345678.901234567;
  for (Eigen::Index i = 0; i < m.rows(); ++i) m.row_labels.push_back("row_" + std::to_string(i));
  for (Eigen::Index j = 0; j < m.cols(); ++j) m.col_labels.push_back("col_" + std::to_string(j));

  const std::string path = scratch_file("roundtrip.csv");
  write_text_file(path, data_matrix_csv(m, "id"));
  const DataMatrix back = load_alpha_matrix(path);
  REQUIRE(back.rows() == m.rows());
  REQUIRE(back.cols() == m.cols());
  CHECK(back.row_labels == m.row_labels);
  CHECK(back.col_labels == m.col_labels);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      CHECK(back.values(i, j) == m.values(i, j));
    }
  }
}

TEST_CASE("ragged row is rejected with its line number") {
  const std::string path = scratch_file("ragged.csv");
  write_text_file(path, "id,a,b,c\nr0,1,2,3\nr1,4,5\n");
  const std::string msg = message_of([&] { load_alpha_matrix(path); });
  CHECK(msg.find(":3:") != std::string::npos);
  CHECK(msg.find("expected 4 cells, found 3") != std::string::npos);
}

TEST_CASE("non-numeric and non-finite cells are rejected with locations") {
  const std::string bad = scratch_file("bad_cell.csv");
  write_text_file(bad, "id,a,b\nr0,1.0,oops\n");
  const std::string msg = message_of([&] { load_alpha_matrix(bad); });
  CHECK(msg.find(":2:") != std::string::npos);
  CHECK(msg.find("column 3") != std::string::npos);
  CHECK(msg.find("oops") != std::string::npos);

  const std::string nan_path = scratch_file("nan_cell.csv");
  write_text_file(nan_path, "id,a,b\nr0,nan,2.0\n");
  const std::string nan_msg = message_of([&] { load_alpha_matrix(nan_path); });
  CHECK(nan_msg.find("non-finite") != std::string::npos);
}

TEST_CASE("price series loads with and without a header") {
  const std::string with = scratch_file("prices_header.csv");
  write_text_file(with, "date,close\n2024-01-01,100.0\n2024-01-02,101.5\n2024-01-03,99.25\n");
  const PriceSeries a = load_prices(with);
  REQUIRE(a.closes.size() == 3);
  CHECK(a.dates.front() == "2024-01-01");
  CHECK(a.closes[1] == 101.5);

  const std::string bare = scratch_file("prices_bare.csv");
  write_text_file(bare, "2024-01-01,100.0\n2024-01-02,101.5\n");
  const PriceSeries b = load_prices(bare);
  CHECK(b.closes.size() == 2);
}

TEST_CASE("price series rejects bad closes and unsorted dates by name") {
  const std::string zero = scratch_file("prices_zero.csv");
  write_text_file(zero, "date,close\n2024-01-01,100.0\n2024-01-02,0.0\n");
  const std::string zero_msg = message_of([&] { load_prices(zero); });
  CHECK(zero_msg.find("2024-01-02") != std::string::npos);

  const std::string dup = scratch_file("prices_dup.csv");
  write_text_file(dup, "date,close\n2024-01-01,100.0\n2024-01-01,101.0\n");
  const std::string dup_msg = message_of([&] { load_prices(dup); });
  CHECK(dup_msg.find("ascending") != std::string::npos);

  const std::string ragged = scratch_file("prices_ragged.csv");
  write_text_file(ragged, "date,close\n2024-01-01,100.0,7\n");
  CHECK_THROWS(load_prices(ragged));
}

TEST_CASE("importance file loads and enforces the expected count") {
  const std::string path = scratch_file("importance.txt");
  write_text_file(path, "1.5\n-2.0\n0.25\n");
  const RawImportance raw = load_importance(path, 3);
  CHECK(raw.values == std::vector<double>{1.5, -2.0, 0.25});
  CHECK(load_importance(path, 0).values.size() == 3);
  CHECK_THROWS(load_importance(path, 4));

  const std::string bad = scratch_file("importance_bad.txt");
  write_text_file(bad, "1.0\nhuh\n");
  CHECK_THROWS(load_importance(bad, 0));
}

TEST_CASE("double formatting re-parses to the exact value") {
  RngStream rng(77);
  for (int rep = 0; rep < 2000; ++rep) {
    const double mag = std::pow(10.0, 40.0 * (rng.next_uniform() - 0.5));
    const double v = rng.next_normal() * mag;
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.1) == "0.1");
}
