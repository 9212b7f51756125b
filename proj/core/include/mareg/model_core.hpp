#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace mareg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Responses Y (n x p) and a column-centered design X (n x q).
///
/// Construction validates: matching row counts, n > 1 + q, every column of X
/// summing to zero within 1e-9 * n * max|X|, and full column rank of X
/// (smallest singular value > 1e-10 * largest). Violations throw the
/// corresponding mareg error type.
class Dataset {
 public:
  Dataset(Matrix y, Matrix x);

  const Matrix& y() const noexcept { return y_; }
  const Matrix& x() const noexcept { return x_; }
  Index n() const noexcept { return y_.rows(); }
  Index p() const noexcept { return y_.cols(); }
  Index q() const noexcept { return x_.cols(); }

 private:
  Matrix y_;
  Matrix x_;
};

/// Regression (S_R), residual (S_E) and total (S_T) sum-of-squares matrices.
struct SumOfSquares {
  Matrix s_r;
  Matrix s_e;
  Matrix s_t;
  Index n = 0;
  Index q = 0;

  Index p() const noexcept { return s_r.rows(); }

  /// Builds a SumOfSquares from S_R and S_E alone (S_T = S_R + S_E).
  /// Checks symmetry, PSD-ness within tolerance and n > 1 + q.
  static SumOfSquares from_parts(Matrix s_r, Matrix s_e, Index n, Index q);
};

/// Symmetric eigendecomposition with eigenvalues in descending order.
///
/// Column i of `vectors` pairs with values[i]. Each column is oriented so that
/// its largest-magnitude entry is positive; ties go to the lowest index.
struct SymEig {
  Vector values;
  Matrix vectors;
  /// True when values[0] - values[1] < 1e-12 * |trace|.
  bool leading_tie = false;
};

/// X_raw minus its column means.
Matrix center_columns(const Matrix& x_raw);

/// S_R = Y'X(X'X)^{-1}X'Y, S_E = Y'(I - 11'/n - X(X'X)^{-1}X')Y, S_T = Y'(I - 11'/n)Y.
///
/// The projection onto span(X) is formed from a thin QR factorization of X.
/// Throws RankDeficiencyError when cond(X'X) exceeds 1e12.
SumOfSquares sums_of_squares(const Dataset& data);

/// (1 - w) S_R + w S_E. Throws DomainError unless 0 <= w <= 1.
Matrix weighted_matrix(const SumOfSquares& ss, double w);

/// Descending eigendecomposition of a symmetric matrix under the sign convention.
/// The input is symmetrized as (M + M')/2 first; asymmetry beyond 1e-8
/// relative to max|M| throws ShapeError.
SymEig sym_eig(const Matrix& m);

/// Flips `v` in place so its largest-magnitude entry is positive (lowest index on ties).
void apply_sign_convention(Eigen::Ref<Vector> v);

/// FNV-1a hash over the raw bytes of S_R, S_E and S_T.
std::uint64_t fingerprint(const SumOfSquares& ss);

}  // namespace mareg
