#include "bid/alpha_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace bid {

void validate(const PriceSeries& p) {
  if (p.dates.size() != p.closes.size()) {
    throw std::invalid_argument("price series date and close counts differ");
  }
  if (p.closes.size() < 2) {
    throw std::invalid_argument("price series needs at least two closes");
  }
  for (std::size_t i = 0; i < p.closes.size(); ++i) {
    if (!(p.closes[i] > 0.0) || !std::isfinite(p.closes[i])) {
      throw std::invalid_argument("non-positive close on " + p.dates[i]);
    }
    if (i > 0 && !(p.dates[i - 1] < p.dates[i])) {
      throw std::invalid_argument("dates not strictly ascending at " + p.dates[i]);
    }
  }
}

ReturnSeries returns(const PriceSeries& prices, ReturnConvention convention) {
  validate(prices);
  ReturnSeries out;
  out.dates.assign(prices.dates.begin() + 1, prices.dates.end());
  out.values.resize(prices.closes.size() - 1);
  for (std::size_t t = 1; t < prices.closes.size(); ++t) {
    const double denom = convention == ReturnConvention::kCurrentClose
                             ? prices.closes[t]
                             : prices.closes[t - 1];
    out.values[t - 1] = (prices.closes[t] - prices.closes[t - 1]) / denom;
  }
  return out;
}

std::vector<double> shifted_return(const std::vector<double>& ret, int h) {
  if (h < 1) throw std::invalid_argument("shift horizon must be at least 1");
  if (ret.size() <= static_cast<std::size_t>(h)) {
    throw std::invalid_argument("return series shorter than the shift horizon");
  }
  return std::vector<double>(ret.begin() + h, ret.end());
}

std::vector<double> fractional_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = shared;
    i = j + 1;
  }
  return ranks;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y,
               bool* degenerate) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("correlation inputs differ in length");
  }
  if (x.size() < 2) {
    throw std::invalid_argument("correlation needs at least two points");
  }
  if (degenerate != nullptr) *degenerate = false;
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    if (degenerate != nullptr) *degenerate = true;
    return 0.0;
  }
  return sxy / std::sqrt(sxx * syy);
}

double spearman(const std::vector<double>& x, const std::vector<double>& y,
                bool* degenerate) {
  return pearson(fractional_ranks(x), fractional_ranks(y), degenerate);
}

double rank_ic(const std::vector<double>& signal, const std::vector<double>& ret,
               int h, bool* degenerate) {
  if (signal.size() != ret.size()) {
    throw std::invalid_argument("signal and return series differ in length");
  }
  const std::vector<double> future = shifted_return(ret, h);
  if (future.size() < 2) {
    throw std::invalid_argument("too few points left after the shift");
  }
  const std::vector<double> head(signal.begin(),
                                 signal.begin() + static_cast<std::ptrdiff_t>(future.size()));
  return spearman(head, future, degenerate);
}

CorrelationSummary mean_pairwise_correlation(const Matrix& rows) {
  if (rows.rows() < 2) {
    throw std::invalid_argument("pairwise correlation needs at least two rows");
  }
  if (rows.cols() < 2) {
    throw std::invalid_argument("pairwise correlation needs at least two columns");
  }
  CorrelationSummary out;
  double total = 0.0;
  std::size_t pairs = 0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const std::vector<double> xi(rows.row(i).begin(), rows.row(i).end());
    for (Eigen::Index j = i + 1; j < rows.rows(); ++j) {
      const std::vector<double> xj(rows.row(j).begin(), rows.row(j).end());
      bool degenerate = false;
      const double c = pearson(xi, xj, &degenerate);
      if (degenerate) ++out.degenerate_pairs;
      total += std::fabs(c);
      ++pairs;
    }
  }
  out.mean_abs = total / static_cast<double>(pairs);
  return out;
}

}  // namespace bid
