#include "bid/randomized_id.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/QR>

#include "bid/rng.hpp"

namespace bid {

RidResult randomized_id(const Matrix& a, std::size_t k, std::uint64_t seed,
                        const RidOptions& options) {
  const auto rows = a.rows();
  const auto cols = a.cols();
  if (rows == 0 || cols == 0) throw std::invalid_argument("empty matrix");
  const auto limit = static_cast<std::size_t>(std::min(rows, cols));
  if (k < 1 || k > limit) {
    throw std::invalid_argument("k must lie in [1, min(rows, cols)]");
  }

  const auto sketch_rows = static_cast<Eigen::Index>(
      std::min<std::size_t>(static_cast<std::size_t>(rows), k + options.oversampling));
  RngStream rng(seed);
  Matrix g(sketch_rows, rows);
  for (Eigen::Index i = 0; i < sketch_rows; ++i) {
    for (Eigen::Index j = 0; j < rows; ++j) g(i, j) = rng.next_normal();
  }
  Matrix sketch = g * a;
  for (std::size_t it = 0; it < options.power_iterations; ++it) {
    sketch = (sketch * a.transpose()) * a;
  }

  Eigen::ColPivHouseholderQR<Matrix> qr(sketch);
  const auto& perm = qr.colsPermutation().indices();
  std::vector<std::size_t> pivots(k);
  for (std::size_t t = 0; t < k; ++t) {
    pivots[t] = static_cast<std::size_t>(perm(static_cast<Eigen::Index>(t)));
  }

  const Matrix r = qr.matrixR();
  const double lead = std::fabs(r(0, 0));
  const double trail = std::fabs(r(static_cast<Eigen::Index>(k) - 1,
                                   static_cast<Eigen::Index>(k) - 1));
  bool warning = lead == 0.0 || trail < 1e-10 * lead;

  const StateVector state =
      StateVector::from_basis(static_cast<std::size_t>(cols), pivots);
  const Decomposition dec = postprocess(a, state);
  warning = warning || dec.rank_deficient;

  // postprocess orders rows by ascending column index; rebuild them in pivot
  // order so the result tracks the factorization's own ranking.
  RidResult result;
  result.basis_indices = pivots;
  result.w.resize(static_cast<Eigen::Index>(k), cols);
  for (std::size_t t = 0; t < k; ++t) {
    const auto sorted_pos = static_cast<Eigen::Index>(
        std::distance(dec.basis_indices.begin(),
                      std::find(dec.basis_indices.begin(), dec.basis_indices.end(),
                                pivots[t])));
    result.w.row(static_cast<Eigen::Index>(t)) = dec.w.row(sorted_pos);
  }
  result.reconstruction_mse = dec.mse;
  result.rank_warning = warning;
  return result;
}

}  // namespace bid
