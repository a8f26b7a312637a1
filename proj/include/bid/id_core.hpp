#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bid {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Dense data matrix with row and column labels carried alongside.
struct DataMatrix {
  Matrix values;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

// Throws unless label counts match the matrix and all entries are finite.
void validate(const DataMatrix& m);

// Column membership indicator: bits[n] == 1 marks column n as a basis
// column, 0 as an interpolated column.
struct StateVector {
  std::vector<std::uint8_t> bits;

  std::size_t size() const { return bits.size(); }
  std::size_t k() const;
  std::vector<std::size_t> basis_set() const;
  std::vector<std::size_t> interpolated_set() const;

  static StateVector from_basis(std::size_t n, const std::vector<std::size_t>& basis);
};

// Model hyperparameters: coefficient bounds [a, b], the inverse-gamma noise
// prior, and entrywise parent means and precisions for the coefficients.
struct Hyperparams {
  double a = -1.0;
  double b = 1.0;
  double alpha_sigma = 0.1;
  double beta_sigma = 1.0;
  Matrix mu;
  Matrix tau;

  // Zero-mean, unit-precision coefficient priors over an n x n grid.
  static Hyperparams weak_defaults(Eigen::Index n, double a = -1.0, double b = 1.0);
};

void validate(const Hyperparams& h, Eigen::Index n);

// C holds the basis columns, W the interpolation coefficients with an exact
// identity block on the basis rows.
struct Decomposition {
  Matrix c;
  Matrix w;
  std::vector<std::size_t> basis_indices;
  double mse = 0.0;
  bool rank_deficient = false;
  std::size_t magnitude_violations = 0;
};

// X copies the basis columns of A and zeroes interpolated ones.
Matrix derive_x(const Matrix& a, const StateVector& r);

double mse(const Matrix& a, const Matrix& x, const Matrix& y);

// Read C = A[:, J] and W = Y[J, :] out of a sampled coefficient matrix.
Decomposition extract_cw(const Matrix& a, const Matrix& y, const StateVector& r);

// Final decomposition: keep the basis columns, refit the interpolated
// coefficients by least squares, force the identity block, and report how
// many fitted coefficients land outside [-1, 1].
Decomposition postprocess(const Matrix& a, const StateVector& r);

}  // namespace bid
