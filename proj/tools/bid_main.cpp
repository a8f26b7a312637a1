#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bid/commands.hpp"

namespace {

void add_common_flags(CLI::App* cmd, bid::RunConfig& cfg) {
  cmd->set_help_flag("--help", "print usage");
  cmd->add_option("--mode", cfg.mode, "gbt, iid, randomized or rankic");
  cmd->add_option("--k", cfg.k, "basis size of the decomposition");
  cmd->add_option("--iterations", cfg.iterations, "sampler iterations");
  cmd->add_option("--burn-in", cfg.burn_in, "iterations discarded before retention");
  cmd->add_option("--thinning", cfg.thinning, "keep every n-th post-burn-in iteration");
  cmd->add_option("--seed", cfg.seed, "random seed");
  cmd->add_option("--swaps-per-sweep", cfg.swaps_per_sweep, "basis exchange moves per iteration");
  cmd->add_option("--select-m", cfg.select_m, "alphas to select");
  cmd->add_option("--h", cfg.h, "holding period in days");
  cmd->add_option("--d-in", cfg.d_in, "days in the training window");
  cmd->add_option("--importance-scale", cfg.importance_scale,
                  "sigmoid scale applied to raw importance scores");
  cmd->add_option("--importance-source", cfg.importance_source,
                  "rankic, uniform or a path to a score file");
  cmd->add_option("--return-convention", cfg.return_convention,
                  "divide one-day moves by the current or the previous close");
  cmd->add_flag("--transpose", cfg.transpose, "decompose the transposed matrix");
  cmd->add_option("--alphas", cfg.alphas_path, "alpha matrix CSV");
  cmd->add_option("--prices", cfg.prices_path, "price series CSV");
  cmd->add_option("--manifest", cfg.manifest_path, "backtest asset manifest JSON");
  cmd->add_option("--out-dir", cfg.out_dir, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  bid::RunConfig cfg;
  if (const char* env = std::getenv("BID_OUT_DIR")) cfg.out_dir = env;

  CLI::App app{"Bayesian interpolative decomposition for alpha selection"};
  app.require_subcommand(1);
  CLI::App* decompose = app.add_subcommand("decompose", "sample a column basis and coefficients");
  CLI::App* select = app.add_subcommand("select", "rank alphas and report the selected set");
  CLI::App* backtest = app.add_subcommand("backtest", "run the selection and trading pipeline");
  for (CLI::App* cmd : {decompose, select, backtest}) add_common_flags(cmd, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    nlohmann::json err;
    err["error"] = e.what();
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return 1;
  }

  try {
    if (decompose->parsed()) return bid::run_decompose(cfg);
    if (select->parsed()) return bid::run_select(cfg);
    return bid::run_backtest_command(cfg);
  } catch (const std::exception& e) {
    nlohmann::json err;
    err["error"] = e.what();
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return 1;
  }
}
