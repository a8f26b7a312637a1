#pragma once

#include <cstddef>
#include <vector>

#include "bid/id_core.hpp"

namespace bid {

// Unbounded per-column scores before squashing.
struct RawImportance {
  std::vector<double> values;
};

// Clamp margin keeping squashed probabilities away from 0 and 1 so prior
// odds stay finite.
inline constexpr double kImportanceEps = 1e-9;

// Per-column probabilities in [kImportanceEps, 1 - kImportanceEps].
struct ImportanceVector {
  std::vector<double> values;
};

// Sigmoid of scale * raw, clamped.
ImportanceVector squash(const RawImportance& raw, double scale = 1.0);

// Flat importance of one half everywhere; makes the prior indifferent to
// which columns sit in the basis.
ImportanceVector uniform_importance(std::size_t n);

// Prior odds factor for swapping basis column j out and column i in. Equal
// probabilities give exactly one so a flat prior cancels bit for bit.
double prior_odds(const ImportanceVector& p, std::size_t j, std::size_t i);

// Rank correlation of each alpha row against the return h steps ahead, as a
// raw importance score. alphas holds one alpha per row over aligned dates.
RawImportance rankic_importance(const Matrix& alphas, const std::vector<double>& ret,
                                int h);

}  // namespace bid
