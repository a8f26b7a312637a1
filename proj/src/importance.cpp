#include "bid/importance.hpp"

#include <cmath>
#include <stdexcept>

#include "bid/alpha_metrics.hpp"

namespace bid {

ImportanceVector squash(const RawImportance& raw, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("importance scale must be positive");
  }
  ImportanceVector out;
  out.values.reserve(raw.values.size());
  for (double v : raw.values) {
    if (std::isnan(v)) throw std::invalid_argument("importance score is NaN");
    double p = 1.0 / (1.0 + std::exp(-scale * v));
    if (p < kImportanceEps) p = kImportanceEps;
    if (p > 1.0 - kImportanceEps) p = 1.0 - kImportanceEps;
    out.values.push_back(p);
  }
  return out;
}

ImportanceVector uniform_importance(std::size_t n) {
  ImportanceVector out;
  out.values.assign(n, 0.5);
  return out;
}

double prior_odds(const ImportanceVector& p, std::size_t j, std::size_t i) {
  if (j >= p.values.size() || i >= p.values.size()) {
    throw std::out_of_range("importance index out of range");
  }
  const double pj = p.values[j];
  const double pi = p.values[i];
  if (pj == pi) return 1.0;
  return (1.0 - pj) / pj * pi / (1.0 - pi);
}

RawImportance rankic_importance(const Matrix& alphas, const std::vector<double>& ret,
                                int h) {
  if (static_cast<std::size_t>(alphas.cols()) != ret.size()) {
    throw std::invalid_argument("alpha columns and return length differ");
  }
  RawImportance out;
  out.values.reserve(static_cast<std::size_t>(alphas.rows()));
  for (Eigen::Index m = 0; m < alphas.rows(); ++m) {
    const std::vector<double> row(alphas.row(m).begin(), alphas.row(m).end());
    out.values.push_back(rank_ic(row, ret, h));
  }
  return out;
}

}  // namespace bid
