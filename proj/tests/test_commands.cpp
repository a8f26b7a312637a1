#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "bid/alpha_metrics.hpp"
#include "bid/commands.hpp"
#include "bid/gibbs.hpp"
#include "bid/io.hpp"
#include "bid/rng.hpp"

using namespace bid;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Fresh scratch directory per call so runs cannot see each other's files.
std::string scratch_dir(const std::string& name) {
  static int counter = 0;
  const fs::path dir =
      fs::temp_directory_path() / "bid_cmd_tests" / (std::to_string(counter++) + "_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Small panel whose returns are partially driven by a handful of alphas.
struct Panel {
  std::string alphas_path;
  std::string prices_path;
  std::size_t n = 12;
  std::size_t days = 40;
};

Panel write_panel(const std::string& dir, std::uint64_t seed) {
  RngStream rng(seed);
  const std::size_t n = 12;
  const std::size_t days = 40;
  std::vector<double> rets(days);
  for (auto& r : rets) r = 0.01 * rng.next_normal();

  std::string alphas = "alpha";
  std::vector<std::string> dates;
  for (std::size_t t = 0; t <= days; ++t) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "2024-%02zu-%02zu", 1 + t / 28, 1 + t % 28);
    dates.push_back(buf);
  }
  for (std::size_t t = 1; t <= days; ++t) alphas += "," + dates[t];
  alphas += "\n";
  for (std::size_t i = 0; i < n; ++i) {
    alphas += "alpha_" + std::to_string(i);
    for (std::size_t t = 0; t < days; ++t) {
      const double next = t + 1 < days ? rets[t + 1] : 0.0;
      const double v = i < 3 ? 50.0 * next + 0.1 * rng.next_normal()
                             : rng.next_normal();
      alphas += "," + format_double(v);
    }
    alphas += "\n";
  }

  std::string prices = "date,close\n";
  double close = 100.0;
  prices += dates[0] + "," + format_double(close) + "\n";
  for (std::size_t t = 0; t < days; ++t) {
    close = close / (1.0 - rets[t]);
    prices += dates[t + 1] + "," + format_double(close) + "\n";
  }

  Panel p;
  p.alphas_path = (fs::path(dir) / "alphas.csv").string();
  p.prices_path = (fs::path(dir) / "prices.csv").string();
  write_text_file(p.alphas_path, alphas);
  write_text_file(p.prices_path, prices);
  return p;
}

std::map<std::string, std::string> artifact_bytes(const std::string& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) files[entry.path().filename().string()] = slurp(entry.path());
  }
  return files;
}

}  // namespace

TEST_CASE("decompose reruns byte-identically and embeds its config") {
  const std::string dir = scratch_dir("det");
  const Panel p = write_panel(dir, 101);
  RunConfig cfg;
  cfg.mode = "gbt";
  cfg.k = 4;
  cfg.iterations = 60;
  cfg.burn_in = 20;
  cfg.thinning = 2;
  cfg.seed = 7;
  cfg.transpose = true;
  cfg.alphas_path = p.alphas_path;
  cfg.out_dir = (fs::path(dir) / "out").string();

  REQUIRE(run_decompose(cfg) == 0);
  const auto first = artifact_bytes(cfg.out_dir);
  REQUIRE(first.count("trace.json") == 1);
  REQUIRE(first.count("loss_curve.csv") == 1);
  REQUIRE(first.count("autocorrelation.csv") == 1);
  REQUIRE(first.count("decomposition.json") == 1);
  REQUIRE(first.count("w_matrix.csv") == 1);

  REQUIRE(run_decompose(cfg) == 0);
  const auto second = artifact_bytes(cfg.out_dir);
  CHECK(first == second);

  for (const auto& [name, bytes] : first) {
    CAPTURE(name);
    CHECK(bytes.find("\"seed\"") != std::string::npos);
    CHECK(bytes.find("\"mode\"") != std::string::npos);
  }
  const json trace = json::parse(first.at("trace.json"));
  CHECK(trace["config"]["seed"] == 7);
  CHECK(trace["config"]["k"] == 4);
  CHECK(trace["losses"].size() == 60);
  CHECK(trace["selection_scores"].size() == p.n);
}

TEST_CASE("uniform importance run reproduces the flat-prior trace") {
  const std::string dir = scratch_dir("reduction");
  const Panel p = write_panel(dir, 102);
  RunConfig cfg;
  cfg.k = 3;
  cfg.iterations = 80;
  cfg.burn_in = 30;
  cfg.seed = 19;
  cfg.swaps_per_sweep = 6;
  cfg.transpose = true;
  cfg.alphas_path = p.alphas_path;

  cfg.mode = "gbt";
  cfg.out_dir = (fs::path(dir) / "gbt").string();
  REQUIRE(run_decompose(cfg) == 0);
  cfg.mode = "iid";
  cfg.importance_source = "uniform";
  cfg.out_dir = (fs::path(dir) / "iid").string();
  REQUIRE(run_decompose(cfg) == 0);

  const json gbt = json::parse(slurp(fs::path(dir) / "gbt" / "trace.json"));
  const json iid = json::parse(slurp(fs::path(dir) / "iid" / "trace.json"));
  CHECK(gbt["losses"] == iid["losses"]);
  CHECK(gbt["sigma2"] == iid["sigma2"]);
  CHECK(gbt["selection_scores"] == iid["selection_scores"]);
  CHECK(gbt["retained_r"] == iid["retained_r"]);
}

TEST_CASE("decompose artifacts describe a valid basis and coefficient matrix") {
  const std::string dir = scratch_dir("artifacts");
  const Panel p = write_panel(dir, 103);
  RunConfig cfg;
  cfg.mode = "iid";
  cfg.importance_source = "rankic";
  cfg.k = 4;
  cfg.iterations = 50;
  cfg.burn_in = 10;
  cfg.seed = 3;
  cfg.transpose = true;
  cfg.alphas_path = p.alphas_path;
  cfg.prices_path = p.prices_path;
  cfg.out_dir = (fs::path(dir) / "out").string();
  REQUIRE(run_decompose(cfg) == 0);

  const json dec = json::parse(slurp(fs::path(cfg.out_dir) / "decomposition.json"));
  CHECK(dec["method"] == "BID with IID");
  REQUIRE(dec["basis_indices"].size() == 4);
  REQUIRE(dec["basis_labels"].size() == 4);
  for (std::size_t t = 0; t < 4; ++t) {
    const auto idx = dec["basis_indices"][t].get<std::size_t>();
    CHECK(dec["basis_labels"][t] == "alpha_" + std::to_string(idx));
  }
  CHECK(dec["mse"].get<double>() <= dec["pre_mse"].get<double>() + 1e-12);

  // The coefficient matrix reloads through the standard reader with the
  // basis labels as rows and an identity block on the basis columns.
  const DataMatrix w = load_alpha_matrix((fs::path(cfg.out_dir) / "w_matrix.csv").string());
  REQUIRE(w.rows() == 4);
  REQUIRE(w.cols() == static_cast<Eigen::Index>(p.n));
  for (std::size_t t = 0; t < 4; ++t) {
    const auto idx = dec["basis_indices"][t].get<Eigen::Index>();
    for (std::size_t u = 0; u < 4; ++u) {
      CHECK(w.values(static_cast<Eigen::Index>(u), idx) == (u == t ? 1.0 : 0.0));
    }
  }

  const json trace = json::parse(slurp(fs::path(cfg.out_dir) / "trace.json"));
  const std::size_t retained = trace["retained_count"].get<std::size_t>();
  CHECK(retained == 8);
  CHECK(trace["sigma2"].size() == retained);
  for (const auto& bits : trace["retained_r"]) {
    std::size_t ones = 0;
    for (const auto& b : bits) ones += b.get<int>();
    CHECK(ones == 4);
  }
}

TEST_CASE("randomized decompose recovers an exactly low-rank panel") {
  const std::string dir = scratch_dir("rid");
  RngStream rng(44);
  Matrix basis(10, 3);
  for (Eigen::Index i = 0; i < basis.rows(); ++i)
    for (Eigen::Index j = 0; j < basis.cols(); ++j) basis(i, j) = rng.next_normal();
  Matrix coef(3, 8);
  for (Eigen::Index i = 0; i < coef.rows(); ++i)
    for (Eigen::Index j = 0; j < coef.cols(); ++j) coef(i, j) = 0.5 * rng.next_normal();
  DataMatrix m;
  m.values = basis * coef;
  for (Eigen::Index i = 0; i < 10; ++i) m.row_labels.push_back("r" + std::to_string(i));
  for (Eigen::Index j = 0; j < 8; ++j) m.col_labels.push_back("c" + std::to_string(j));
  const std::string path = (fs::path(dir) / "panel.csv").string();
  write_text_file(path, data_matrix_csv(m));

  RunConfig cfg;
  cfg.mode = "randomized";
  cfg.k = 3;
  cfg.seed = 9;
  cfg.alphas_path = path;
  cfg.out_dir = (fs::path(dir) / "out").string();
  REQUIRE(run_decompose(cfg) == 0);
  const json dec = json::parse(slurp(fs::path(cfg.out_dir) / "decomposition.json"));
  CHECK(dec["method"] == "Randomized ID");
  CHECK(dec["mse"].get<double>() <= 1e-10);
  CHECK_FALSE(dec["rank_deficient"].get<bool>());
}

TEST_CASE("select returns distinct indices and matches the rank statistic baseline") {
  const std::string dir = scratch_dir("select");
  const Panel p = write_panel(dir, 104);
  RunConfig cfg;
  cfg.mode = "rankic";
  cfg.select_m = 5;
  cfg.alphas_path = p.alphas_path;
  cfg.prices_path = p.prices_path;
  cfg.out_dir = (fs::path(dir) / "out").string();
  REQUIRE(run_select(cfg) == 0);

  const json sel = json::parse(slurp(fs::path(cfg.out_dir) / "selection.json"));
  REQUIRE(sel["selected_indices"].size() == 5);
  std::vector<std::size_t> selected;
  for (const auto& v : sel["selected_indices"]) selected.push_back(v.get<std::size_t>());
  std::vector<std::size_t> unique = selected;
  std::sort(unique.begin(), unique.end());
  CHECK(std::adjacent_find(unique.begin(), unique.end()) == unique.end());

  // Recompute the baseline directly: rank correlation of each alpha row
  // against the next day's return, top five.
  const DataMatrix alphas = load_alpha_matrix(p.alphas_path);
  const PriceSeries prices = load_prices(p.prices_path);
  const std::vector<double> ret = returns(prices, ReturnConvention::kCurrentClose).values;
  std::vector<double> ics;
  for (Eigen::Index i = 0; i < alphas.rows(); ++i) {
    std::vector<double> row(alphas.values.row(i).begin(), alphas.values.row(i).end());
    ics.push_back(rank_ic(row, ret, 1));
  }
  CHECK(selected == top_m_select(ics, 5));
  CHECK(sel["scores"].size() == ics.size());

  // The driving alphas carry the signal, so they fill the top three.
  std::vector<std::size_t> top3(selected.begin(), selected.begin() + 3);
  std::sort(top3.begin(), top3.end());
  CHECK(top3 == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("backtest command writes a full report over a two-asset manifest") {
  const std::string dir = scratch_dir("backtest");
  const Panel a = write_panel(dir, 105);
  const fs::path sub = fs::path(dir) / "b";
  fs::create_directories(sub);
  const Panel b = write_panel(sub.string(), 106);
  write_text_file((fs::path(dir) / "manifest.json").string(),
                  "{\n"
                  "  \"assets\": [\n"
                  "    {\"name\": \"first\", \"alphas\": \"alphas.csv\", \"prices\": \"prices.csv\"},\n"
                  "    {\"name\": \"second\", \"alphas\": \"b/alphas.csv\", \"prices\": \"b/prices.csv\"}\n"
                  "  ]\n"
                  "}\n");

  RunConfig cfg;
  cfg.mode = "gbt";
  cfg.k = 3;
  cfg.iterations = 40;
  cfg.burn_in = 10;
  cfg.seed = 21;
  cfg.select_m = 3;
  cfg.d_in = 30;
  cfg.manifest_path = (fs::path(dir) / "manifest.json").string();
  cfg.out_dir = (fs::path(dir) / "out").string();
  REQUIRE(run_backtest_command(cfg) == 0);

  const json report = json::parse(slurp(fs::path(cfg.out_dir) / "backtest_report.json"));
  REQUIRE(report["assets"].size() == 2);
  CHECK(report["assets"][0]["name"] == "first");
  CHECK(report["assets"][1]["name"] == "second");
  for (const auto& asset : report["assets"]) {
    CHECK(asset["selected_indices"].size() == 3);
    CHECK(asset["fits"].size() == 3);
  }
  CHECK(report.contains("in_sample"));
  CHECK(report.contains("out_of_sample"));
  CHECK(report["in_sample"].contains("sharpe"));
  CHECK(report["out_of_sample"].contains("max_drawdown"));

  // Portfolio files: training window trades 29 days, evaluation 9, and the
  // compounded values stay positive.
  const std::string is_csv = slurp(fs::path(cfg.out_dir) / "portfolio_is.csv");
  const std::string os_csv = slurp(fs::path(cfg.out_dir) / "portfolio_os.csv");
  CHECK(std::count(is_csv.begin(), is_csv.end(), '\n') == 31);
  CHECK(std::count(os_csv.begin(), os_csv.end(), '\n') == 11);

  // Byte-stable across reruns.
  const auto first = artifact_bytes(cfg.out_dir);
  REQUIRE(run_backtest_command(cfg) == 0);
  CHECK(first == artifact_bytes(cfg.out_dir));
}

TEST_CASE("commands reject malformed configurations") {
  const std::string dir = scratch_dir("errors");
  const Panel p = write_panel(dir, 107);
  RunConfig cfg;
  cfg.alphas_path = p.alphas_path;
  cfg.out_dir = (fs::path(dir) / "out").string();

  cfg.mode = "quantum";
  CHECK_THROWS(run_decompose(cfg));
  cfg.mode = "rankic";
  CHECK_THROWS(run_decompose(cfg));

  cfg.mode = "iid";
  cfg.importance_source = "rankic";
  cfg.transpose = true;
  CHECK_THROWS_WITH_AS(run_decompose(cfg), doctest::Contains("--prices"),
                       std::runtime_error);

  cfg.mode = "gbt";
  cfg.alphas_path.clear();
  CHECK_THROWS(run_decompose(cfg));
  CHECK_THROWS(run_select(cfg));
  CHECK_THROWS(run_backtest_command(cfg));

  RunConfig sel;
  sel.mode = "rankic";
  sel.alphas_path = p.alphas_path;
  sel.prices_path = p.prices_path;
  sel.select_m = 500;
  sel.out_dir = (fs::path(dir) / "out2").string();
  CHECK_THROWS(run_select(sel));
}
