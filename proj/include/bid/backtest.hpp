#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bid/alpha_metrics.hpp"
#include "bid/gibbs.hpp"
#include "bid/id_core.hpp"

namespace bid {

// Column split point between the training window and the evaluation window.
struct SampleSplit {
  std::size_t d_in = 0;
  std::size_t d = 0;

  void validate() const;
};

struct OlsFit {
  double w = 0.0;
  double b = 0.0;
  std::size_t alpha_index = 0;
  bool degenerate = false;
};

// Compounded portfolio path. values has one more entry than daily_returns
// and always starts at 1.
struct PortfolioSeries {
  std::vector<double> values;
  std::vector<double> daily_returns;
};

struct PerfMetrics {
  double sharpe = 0.0;
  double annual_return = 0.0;
  double max_drawdown = 0.0;
  bool degenerate = false;
};

enum class SelectionMethod { kGbt, kIid, kRandomized, kTopRankIc };

// One asset's inputs: an alpha matrix with one alpha per row over d days,
// and d + 1 closing prices so every day has a return.
struct AssetData {
  std::string name;
  Matrix alphas;
  PriceSeries prices;
};

struct BacktestOptions {
  SampleSplit split;
  std::size_t select_m = 10;
  int h = 1;
  SelectionMethod method = SelectionMethod::kGbt;
  ChainConfig chain;
  double importance_scale = 1.0;
  ReturnConvention convention = ReturnConvention::kCurrentClose;
  // When nonempty these raw scores replace the rank-correlation importance
  // fed to the squashed prior, one per alpha.
  std::vector<double> importance_override;
};

struct AssetResult {
  std::string name;
  std::vector<std::size_t> selected;
  double mean_rank_ic = 0.0;
  CorrelationSummary correlation;
  std::vector<OlsFit> fits;
  std::vector<std::uint8_t> signals_is;
  std::vector<std::uint8_t> signals_os;
};

struct BacktestReport {
  std::vector<AssetResult> assets;
  PortfolioSeries in_sample;
  PortfolioSeries out_of_sample;
  PerfMetrics in_sample_metrics;
  PerfMetrics out_of_sample_metrics;
};

std::pair<Matrix, Matrix> split(const Matrix& a, const SampleSplit& s);

// Per-alpha ranking scores for the configured method, higher is better.
// alphas holds one alpha per row aligned with ret; chains see the transpose.
std::vector<double> selection_scores(const Matrix& alphas,
                                     const std::vector<double>& ret,
                                     const BacktestOptions& options,
                                     std::uint64_t seed);

// Simple regression of target on alpha. A constant alpha yields the
// degenerate fit w = 0, b = mean(target).
OlsFit ols_fit(const std::vector<double>& alpha, const std::vector<double>& target,
               std::size_t alpha_index = 0);

// True when the summed fitted predictions are strictly positive.
bool daily_signal(const std::vector<double>& day_alphas,
                  const std::vector<OlsFit>& fits);

// Equal-weight long-only compounding over an asset-by-day grid. Days where
// nothing is long earn zero.
PortfolioSeries simulate(const std::vector<std::vector<std::uint8_t>>& signals,
                         const std::vector<std::vector<double>>& realized);

PerfMetrics perf_metrics(const PortfolioSeries& p);

// Full pipeline: per asset, select alphas on the training window, fit each
// selected alpha against the h-day-forward return, then trade both windows
// with equal weights across assets. Chains run one thread per asset.
BacktestReport run_backtest(const std::vector<AssetData>& assets,
                            const BacktestOptions& options);

}  // namespace bid
