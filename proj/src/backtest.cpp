#include "bid/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

#include "bid/importance.hpp"
#include "bid/randomized_id.hpp"
#include "bid/rng.hpp"

namespace bid {
namespace {

constexpr double kTradingDays = 252.0;

std::vector<double> row_values(const Matrix& m, std::size_t row, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t t = 0; t < count; ++t) {
    out[t] = m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(t));
  }
  return out;
}

AssetResult evaluate_asset(const AssetData& asset, const BacktestOptions& options,
                           std::uint64_t seed, std::vector<double>* realized_is,
                           std::vector<double>* realized_os) {
  const auto d = options.split.d;
  const auto d_in = options.split.d_in;
  const auto h = static_cast<std::size_t>(options.h);

  const ReturnSeries ret = returns(asset.prices, options.convention);
  const std::vector<double> ret_is(ret.values.begin(),
                                   ret.values.begin() + static_cast<std::ptrdiff_t>(d_in));
  const std::vector<double> forward = shifted_return(ret.values, options.h);

  const Matrix alphas_is = asset.alphas.leftCols(static_cast<Eigen::Index>(d_in));
  const std::vector<double> scores = selection_scores(alphas_is, ret_is, options, seed);

  AssetResult result;
  result.name = asset.name;
  result.selected = top_m_select(scores, options.select_m);

  double ic_sum = 0.0;
  for (std::size_t idx : result.selected) {
    ic_sum += rank_ic(row_values(asset.alphas, idx, d_in), ret_is, options.h);
  }
  result.mean_rank_ic = ic_sum / static_cast<double>(result.selected.size());

  Matrix selected_rows(static_cast<Eigen::Index>(result.selected.size()),
                       static_cast<Eigen::Index>(d_in));
  for (std::size_t t = 0; t < result.selected.size(); ++t) {
    selected_rows.row(static_cast<Eigen::Index>(t)) =
        alphas_is.row(static_cast<Eigen::Index>(result.selected[t]));
  }
  result.correlation = mean_pairwise_correlation(selected_rows);

  const std::size_t train = d_in - h;
  for (std::size_t idx : result.selected) {
    std::vector<double> x(train), y(train);
    for (std::size_t t = 0; t < train; ++t) {
      x[t] = asset.alphas(static_cast<Eigen::Index>(idx), static_cast<Eigen::Index>(t));
      y[t] = forward[t];
    }
    result.fits.push_back(ols_fit(x, y, idx));
  }

  auto signal_window = [&](std::size_t begin, std::size_t end,
                           std::vector<std::uint8_t>* signals,
                           std::vector<double>* realized) {
    for (std::size_t t = begin; t < end; ++t) {
      std::vector<double> day(result.selected.size());
      for (std::size_t m = 0; m < result.selected.size(); ++m) {
        day[m] = asset.alphas(static_cast<Eigen::Index>(result.selected[m]),
                              static_cast<Eigen::Index>(t));
      }
      signals->push_back(daily_signal(day, result.fits) ? 1 : 0);
      realized->push_back(forward[t]);
    }
  };
  signal_window(0, d_in - h, &result.signals_is, realized_is);
  signal_window(d_in, d - h, &result.signals_os, realized_os);
  return result;
}

}  // namespace

void SampleSplit::validate() const {
  if (d_in == 0 || d_in >= d) {
    throw std::invalid_argument("split point must satisfy 0 < d_in < d");
  }
}

std::vector<double> selection_scores(const Matrix& alphas,
                                     const std::vector<double>& ret,
                                     const BacktestOptions& options,
                                     std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(alphas.rows());
  if (!options.importance_override.empty() && options.importance_override.size() != n) {
    throw std::invalid_argument("importance override length does not match alpha count");
  }
  switch (options.method) {
    case SelectionMethod::kTopRankIc:
      return rankic_importance(alphas, ret, options.h).values;
    case SelectionMethod::kRandomized: {
      const RidResult rid = randomized_id(alphas.transpose(), options.select_m, seed);
      // Pivot order becomes a descending score so the picker reproduces it.
      std::vector<double> scores(n, 0.0);
      for (std::size_t t = 0; t < rid.basis_indices.size(); ++t) {
        scores[rid.basis_indices[t]] =
            static_cast<double>(rid.basis_indices.size() - t);
      }
      return scores;
    }
    case SelectionMethod::kGbt:
    case SelectionMethod::kIid: {
      ChainConfig cfg = options.chain;
      cfg.seed = seed;
      cfg.mode = options.method == SelectionMethod::kIid ? Mode::kIid : Mode::kGbt;
      // Chains decompose columns, so alphas enter transposed: days by alphas.
      const Matrix a = alphas.transpose();
      const auto h = Hyperparams::weak_defaults(a.cols());
      if (cfg.mode == Mode::kIid) {
        RawImportance raw;
        raw.values = options.importance_override.empty()
                         ? rankic_importance(alphas, ret, options.h).values
                         : options.importance_override;
        const ImportanceVector imp = squash(raw, options.importance_scale);
        return run_chain(a, h, cfg, &imp).selection_scores;
      }
      return run_chain(a, h, cfg).selection_scores;
    }
  }
  throw std::logic_error("unreachable selection method");
}

std::pair<Matrix, Matrix> split(const Matrix& a, const SampleSplit& s) {
  s.validate();
  if (static_cast<std::size_t>(a.cols()) != s.d) {
    throw std::invalid_argument("matrix width does not match the split");
  }
  const auto cut = static_cast<Eigen::Index>(s.d_in);
  return {a.leftCols(cut), a.rightCols(a.cols() - cut)};
}

OlsFit ols_fit(const std::vector<double>& alpha, const std::vector<double>& target,
               std::size_t alpha_index) {
  if (alpha.size() != target.size()) {
    throw std::invalid_argument("alpha and target lengths differ");
  }
  if (alpha.size() < 2) throw std::invalid_argument("need at least two points");
  const auto n = static_cast<double>(alpha.size());
  double mean_a = 0.0, mean_t = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    mean_a += alpha[i];
    mean_t += target[i];
  }
  mean_a /= n;
  mean_t /= n;
  double cov = 0.0, var = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    cov += (alpha[i] - mean_a) * (target[i] - mean_t);
    var += (alpha[i] - mean_a) * (alpha[i] - mean_a);
  }
  OlsFit fit;
  fit.alpha_index = alpha_index;
  if (var == 0.0) {
    fit.w = 0.0;
    fit.b = mean_t;
    fit.degenerate = true;
    return fit;
  }
  fit.w = cov / var;
  fit.b = mean_t - fit.w * mean_a;
  return fit;
}

bool daily_signal(const std::vector<double>& day_alphas,
                  const std::vector<OlsFit>& fits) {
  if (day_alphas.size() != fits.size()) {
    throw std::invalid_argument("one alpha value per fit required");
  }
  double total = 0.0;
  for (std::size_t m = 0; m < fits.size(); ++m) {
    total += fits[m].w * day_alphas[m] + fits[m].b;
  }
  return total > 0.0;
}

PortfolioSeries simulate(const std::vector<std::vector<std::uint8_t>>& signals,
                         const std::vector<std::vector<double>>& realized) {
  if (signals.size() != realized.size()) {
    throw std::invalid_argument("signal and return grids differ in asset count");
  }
  if (signals.empty()) throw std::invalid_argument("no assets to simulate");
  const std::size_t days = signals.front().size();
  for (std::size_t a = 0; a < signals.size(); ++a) {
    if (signals[a].size() != days || realized[a].size() != days) {
      throw std::invalid_argument("signal and return grids differ in day count");
    }
  }
  PortfolioSeries p;
  p.values.push_back(1.0);
  for (std::size_t t = 0; t < days; ++t) {
    double total = 0.0;
    std::size_t held = 0;
    for (std::size_t a = 0; a < signals.size(); ++a) {
      if (signals[a][t]) {
        total += realized[a][t];
        ++held;
      }
    }
    const double day_return = held == 0 ? 0.0 : total / static_cast<double>(held);
    p.daily_returns.push_back(day_return);
    p.values.push_back(p.values.back() * (1.0 + day_return));
  }
  return p;
}

PerfMetrics perf_metrics(const PortfolioSeries& p) {
  if (p.values.size() < 2 || p.daily_returns.size() + 1 != p.values.size()) {
    throw std::invalid_argument("portfolio series is malformed");
  }
  const auto n = static_cast<double>(p.daily_returns.size());
  double mean = 0.0;
  for (double r : p.daily_returns) mean += r;
  mean /= n;
  double ss = 0.0;
  for (double r : p.daily_returns) ss += (r - mean) * (r - mean);

  PerfMetrics out;
  out.annual_return = mean * kTradingDays;
  if (n < 2 || ss == 0.0) {
    out.sharpe = 0.0;
    out.degenerate = true;
  } else {
    const double sd = std::sqrt(ss / (n - 1.0));
    out.sharpe = mean / sd * std::sqrt(kTradingDays);
  }
  double peak = p.values.front();
  double worst = 0.0;
  for (double v : p.values) {
    peak = std::max(peak, v);
    worst = std::max(worst, (peak - v) / peak);
  }
  out.max_drawdown = worst;
  return out;
}

BacktestReport run_backtest(const std::vector<AssetData>& assets,
                            const BacktestOptions& options) {
  options.split.validate();
  if (assets.empty()) throw std::invalid_argument("no assets supplied");
  if (options.h < 1) throw std::invalid_argument("holding period must be positive");
  const auto h = static_cast<std::size_t>(options.h);
  if (options.split.d_in <= h + 1) {
    throw std::invalid_argument("training window too short for the holding period");
  }
  if (options.split.d - options.split.d_in <= h) {
    throw std::invalid_argument("evaluation window too short for the holding period");
  }
  if (options.select_m == 0) throw std::invalid_argument("must select at least one alpha");
  for (const auto& asset : assets) {
    if (static_cast<std::size_t>(asset.alphas.cols()) != options.split.d) {
      throw std::invalid_argument("asset " + asset.name +
                                  ": alpha day count does not match the split");
    }
    if (static_cast<std::size_t>(asset.alphas.rows()) < options.select_m) {
      throw std::invalid_argument("asset " + asset.name + ": fewer alphas than selected");
    }
    validate(asset.prices);
    if (asset.prices.closes.size() != options.split.d + 1) {
      throw std::invalid_argument("asset " + asset.name +
                                  ": need one more close than trading days");
    }
  }

  BacktestReport report;
  report.assets.resize(assets.size());
  std::vector<std::vector<double>> realized_is(assets.size());
  std::vector<std::vector<double>> realized_os(assets.size());
  std::vector<std::exception_ptr> failures(assets.size());
  std::vector<std::thread> workers;
  workers.reserve(assets.size());
  for (std::size_t i = 0; i < assets.size(); ++i) {
    workers.emplace_back([&, i] {
      try {
        report.assets[i] =
            evaluate_asset(assets[i], options, mix_seed(options.chain.seed, i),
                           &realized_is[i], &realized_os[i]);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<std::vector<std::uint8_t>> signals_is, signals_os;
  for (const auto& asset : report.assets) {
    signals_is.push_back(asset.signals_is);
    signals_os.push_back(asset.signals_os);
  }
  report.in_sample = simulate(signals_is, realized_is);
  report.out_of_sample = simulate(signals_os, realized_os);
  report.in_sample_metrics = perf_metrics(report.in_sample);
  report.out_of_sample_metrics = perf_metrics(report.out_of_sample);
  return report;
}

}  // namespace bid
