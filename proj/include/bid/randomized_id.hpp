#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "bid/id_core.hpp"

namespace bid {

// Sketching knobs. The defaults follow common practice for low-rank column
// selection; both are exposed so callers can trade accuracy for speed.
struct RidOptions {
  std::size_t oversampling = 10;
  std::size_t power_iterations = 1;
};

struct RidResult {
  // Basis columns in pivot order, most significant first.
  std::vector<std::size_t> basis_indices;
  // Coefficients, one row per basis column in the same order, so that
  // a is approximated by a[:, basis_indices] * w.
  Matrix w;
  double reconstruction_mse = 0.0;
  // Set when the trailing pivots of the sketch factorization are negligible,
  // meaning k exceeds the numerical rank of the input.
  bool rank_warning = false;
};

// Interpolative decomposition through a seeded Gaussian sketch followed by
// column-pivoted QR on the sketch. Deterministic for a fixed seed.
RidResult randomized_id(const Matrix& a, std::size_t k, std::uint64_t seed,
                        const RidOptions& options = {});

}  // namespace bid
