#include "bid/id_core.hpp"

#include <cmath>
#include <stdexcept>

namespace bid {

void validate(const DataMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) {
    throw std::invalid_argument("data matrix must be non-empty");
  }
  if (!m.row_labels.empty() &&
      m.row_labels.size() != static_cast<std::size_t>(m.rows())) {
    throw std::invalid_argument("row label count does not match the matrix");
  }
  if (!m.col_labels.empty() &&
      m.col_labels.size() != static_cast<std::size_t>(m.cols())) {
    throw std::invalid_argument("column label count does not match the matrix");
  }
  if (!m.values.allFinite()) {
    throw std::invalid_argument("data matrix has non-finite entries");
  }
}

std::size_t StateVector::k() const {
  std::size_t count = 0;
  for (auto b : bits) count += (b != 0);
  return count;
}

std::vector<std::size_t> StateVector::basis_set() const {
  std::vector<std::size_t> out;
  for (std::size_t n = 0; n < bits.size(); ++n) {
    if (bits[n]) out.push_back(n);
  }
  return out;
}

std::vector<std::size_t> StateVector::interpolated_set() const {
  std::vector<std::size_t> out;
  for (std::size_t n = 0; n < bits.size(); ++n) {
    if (!bits[n]) out.push_back(n);
  }
  return out;
}

StateVector StateVector::from_basis(std::size_t n,
                                    const std::vector<std::size_t>& basis) {
  StateVector r;
  r.bits.assign(n, 0);
  for (std::size_t idx : basis) {
    if (idx >= n) throw std::out_of_range("basis index out of range");
    if (r.bits[idx]) throw std::invalid_argument("duplicate basis index");
    r.bits[idx] = 1;
  }
  return r;
}

Hyperparams Hyperparams::weak_defaults(Eigen::Index n, double a, double b) {
  Hyperparams h;
  h.a = a;
  h.b = b;
  h.mu = Matrix::Zero(n, n);
  h.tau = Matrix::Ones(n, n);
  return h;
}

void validate(const Hyperparams& h, Eigen::Index n) {
  if (!(h.a < h.b)) throw std::invalid_argument("coefficient bounds need a < b");
  if (!(h.alpha_sigma > 0.0) || !(h.beta_sigma > 0.0)) {
    throw std::invalid_argument("noise prior parameters must be positive");
  }
  if (h.mu.rows() != n || h.mu.cols() != n || h.tau.rows() != n || h.tau.cols() != n) {
    throw std::invalid_argument("coefficient prior grids must be n x n");
  }
  if (!h.mu.allFinite()) {
    throw std::invalid_argument("coefficient prior means must be finite");
  }
  if (!(h.tau.array() > 0.0).all()) {
    throw std::invalid_argument("coefficient prior precisions must be positive");
  }
}

Matrix derive_x(const Matrix& a, const StateVector& r) {
  if (static_cast<Eigen::Index>(r.size()) != a.cols()) {
    throw std::invalid_argument("state length does not match column count");
  }
  Matrix x = Matrix::Zero(a.rows(), a.cols());
  for (Eigen::Index n = 0; n < a.cols(); ++n) {
    if (r.bits[static_cast<std::size_t>(n)]) x.col(n) = a.col(n);
  }
  return x;
}

double mse(const Matrix& a, const Matrix& x, const Matrix& y) {
  if (x.rows() != a.rows() || y.cols() != a.cols() || x.cols() != y.rows()) {
    throw std::invalid_argument("factor shapes do not match the data matrix");
  }
  const double denom = static_cast<double>(a.rows()) * static_cast<double>(a.cols());
  return (a - x * y).squaredNorm() / denom;
}

Decomposition extract_cw(const Matrix& a, const Matrix& y, const StateVector& r) {
  if (static_cast<Eigen::Index>(r.size()) != a.cols()) {
    throw std::invalid_argument("state length does not match column count");
  }
  if (y.rows() != a.cols() || y.cols() != a.cols()) {
    throw std::invalid_argument("coefficient matrix must be square over columns");
  }
  Decomposition d;
  d.basis_indices = r.basis_set();
  if (d.basis_indices.empty()) {
    throw std::invalid_argument("basis is empty");
  }
  const auto k = static_cast<Eigen::Index>(d.basis_indices.size());
  d.c.resize(a.rows(), k);
  d.w.resize(k, a.cols());
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto col = static_cast<Eigen::Index>(d.basis_indices[static_cast<std::size_t>(j)]);
    d.c.col(j) = a.col(col);
    d.w.row(j) = y.row(col);
  }
  const double denom = static_cast<double>(a.rows()) * static_cast<double>(a.cols());
  d.mse = (a - d.c * d.w).squaredNorm() / denom;
  return d;
}

Decomposition postprocess(const Matrix& a, const StateVector& r) {
  if (static_cast<Eigen::Index>(r.size()) != a.cols()) {
    throw std::invalid_argument("state length does not match column count");
  }
  Decomposition d;
  d.basis_indices = r.basis_set();
  if (d.basis_indices.empty()) {
    throw std::invalid_argument("basis is empty");
  }
  const auto k = static_cast<Eigen::Index>(d.basis_indices.size());
  d.c.resize(a.rows(), k);
  for (Eigen::Index j = 0; j < k; ++j) {
    d.c.col(j) = a.col(static_cast<Eigen::Index>(d.basis_indices[static_cast<std::size_t>(j)]));
  }

  // Minimum-norm least squares through the SVD with a relative cutoff, so a
  // rank-deficient basis still yields a usable fit.
  Eigen::JacobiSVD<Matrix> svd(d.c, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double cutoff = 1e-10;
  svd.setThreshold(cutoff);
  d.rank_deficient = svd.rank() < k;

  d.w = Matrix::Zero(k, a.cols());
  std::vector<bool> is_basis(static_cast<std::size_t>(a.cols()), false);
  for (std::size_t idx : d.basis_indices) is_basis[idx] = true;
  for (Eigen::Index n = 0; n < a.cols(); ++n) {
    if (is_basis[static_cast<std::size_t>(n)]) continue;
    d.w.col(n) = svd.solve(a.col(n));
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    d.w.col(static_cast<Eigen::Index>(d.basis_indices[static_cast<std::size_t>(j)]))
        .setZero();
    d.w(j, static_cast<Eigen::Index>(d.basis_indices[static_cast<std::size_t>(j)])) = 1.0;
  }

  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index n = 0; n < a.cols(); ++n) {
      if (std::fabs(d.w(j, n)) > 1.0 + 1e-12) ++d.magnitude_violations;
    }
  }
  const double denom = static_cast<double>(a.rows()) * static_cast<double>(a.cols());
  d.mse = (a - d.c * d.w).squaredNorm() / denom;
  return d;
}

}  // namespace bid
