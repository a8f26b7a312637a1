#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace bid {

// Shared command configuration; each command reads the subset it needs.
// importance_source is "rankic", "uniform" or a path to a score file.
struct RunConfig {
  std::string mode = "gbt";
  std::size_t k = 10;
  std::size_t iterations = 1000;
  std::size_t burn_in = 100;
  std::size_t thinning = 5;
  std::uint64_t seed = 0;
  std::size_t swaps_per_sweep = 1;
  std::size_t select_m = 10;
  int h = 1;
  std::size_t d_in = 0;
  double importance_scale = 1.0;
  std::string importance_source = "rankic";
  std::string return_convention = "current";
  bool transpose = false;
  std::string alphas_path;
  std::string prices_path;
  std::string manifest_path;
  std::string out_dir = ".";
};

// Each command writes its artifacts under out_dir, prints a summary table to
// stdout and returns the process exit code.
int run_decompose(const RunConfig& cfg);
int run_select(const RunConfig& cfg);
int run_backtest_command(const RunConfig& cfg);

}  // namespace bid
