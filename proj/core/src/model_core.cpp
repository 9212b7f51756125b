#include "mareg/model_core.hpp"

#include "mareg/errors.hpp"

#include <cmath>
#include <cstring>
#include <sstream>
#include <string>

namespace mareg {
namespace {

std::string dims(Index rows, Index cols) {
  std::ostringstream os;
  os << rows << "x" << cols;
  return os.str();
}

// Singular values of the q x q triangular factor equal those of X.
Vector design_singular_values(const Matrix& upper) {
  return Eigen::JacobiSVD<Matrix>(upper).singularValues();
}

Matrix upper_factor(const Eigen::HouseholderQR<Matrix>& qr, Index q) {
  return qr.matrixQR().topRows(q).triangularView<Eigen::Upper>();
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

void check_symmetric(const Matrix& m, double rel_tol, const char* name) {
  if (m.rows() != m.cols()) {
    throw ShapeError(std::string(name) + " must be square, got " + dims(m.rows(), m.cols()));
  }
  const double scale = max_abs(m);
  const double asym = max_abs(m - m.transpose());
  if (asym > rel_tol * scale) {
    std::ostringstream os;
    os << name << " is not symmetric: max|M - M'| = " << asym << " exceeds " << rel_tol
       << " * max|M| = " << rel_tol * scale;
    throw ShapeError(os.str());
  }
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

Dataset::Dataset(Matrix y, Matrix x) : y_(std::move(y)), x_(std::move(x)) {
  if (y_.rows() != x_.rows()) {
    std::ostringstream os;
    os << "row count mismatch: Y has " << y_.rows() << " rows, X has " << x_.rows() << " rows";
    throw ShapeError(os.str());
  }
  if (y_.cols() < 1) throw ShapeError("Y must have at least one column");
  if (x_.cols() < 1) throw ShapeError("X must have at least one column");
  const Index n = y_.rows();
  const Index q = x_.cols();
  if (n <= 1 + q) {
    std::ostringstream os;
    os << "need n > 1 + q, got n = " << n << ", q = " << q;
    throw DegreesOfFreedomError(os.str());
  }
  if (!y_.allFinite() || !x_.allFinite()) throw DomainError("Y and X must contain only finite values");

  const double tol = 1e-9 * static_cast<double>(n) * max_abs(x_);
  const Eigen::RowVectorXd sums = x_.colwise().sum();
  for (Index j = 0; j < q; ++j) {
    if (std::abs(sums(j)) > tol) {
      std::ostringstream os;
      os << "column " << j << " of X is not centered (sum = " << sums(j) << ")";
      throw DomainError(os.str());
    }
  }

  const Eigen::HouseholderQR<Matrix> qr(x_);
  const Vector sv = design_singular_values(upper_factor(qr, q));
  if (!(sv(q - 1) > 1e-10 * sv(0))) {
    std::ostringstream os;
    os << "X (" << dims(n, q) << ") is rank deficient: singular values " << sv(0) << " .. "
       << sv(q - 1);
    throw RankDeficiencyError(os.str());
  }
}

SumOfSquares SumOfSquares::from_parts(Matrix s_r, Matrix s_e, Index n, Index q) {
  check_symmetric(s_r, 1e-10, "S_R");
  check_symmetric(s_e, 1e-10, "S_E");
  if (s_r.rows() != s_e.rows()) {
    throw ShapeError("S_R is " + dims(s_r.rows(), s_r.cols()) + " but S_E is " +
                     dims(s_e.rows(), s_e.cols()));
  }
  if (q < 1 || n <= 1 + q) {
    std::ostringstream os;
    os << "need q >= 1 and n > 1 + q, got n = " << n << ", q = " << q;
    throw DegreesOfFreedomError(os.str());
  }
  for (const Matrix* m : {&s_r, &s_e}) {
    const double tr = m->trace();
    const double min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(symmetrized(*m), Eigen::EigenvaluesOnly)
                               .eigenvalues()(0);
    if (min_eig < -1e-8 * std::abs(tr)) {
      std::ostringstream os;
      os << (m == &s_r ? "S_R" : "S_E") << " is not positive semidefinite (min eigenvalue "
         << min_eig << ")";
      throw DomainError(os.str());
    }
  }
  SumOfSquares ss;
  ss.s_r = symmetrized(s_r);
  ss.s_e = symmetrized(s_e);
  ss.s_t = ss.s_r + ss.s_e;
  ss.n = n;
  ss.q = q;
  return ss;
}

Matrix center_columns(const Matrix& x_raw) {
  if (x_raw.rows() < 1) throw ShapeError("center_columns needs at least one row");
  const Eigen::RowVectorXd mean = x_raw.colwise().mean();
  return x_raw.rowwise() - mean;
}

SumOfSquares sums_of_squares(const Dataset& data) {
  const Index n = data.n();
  const Index q = data.q();

  const Eigen::HouseholderQR<Matrix> qr(data.x());
  const Vector sv = design_singular_values(upper_factor(qr, q));
  const double ratio = sv(0) / sv(q - 1);
  const double cond_xtx = ratio * ratio;
  if (!(cond_xtx <= 1e12)) {
    std::ostringstream os;
    os << "X'X is singular or ill-conditioned for design " << dims(n, q)
       << ": condition number " << cond_xtx << " exceeds 1e12";
    throw RankDeficiencyError(os.str());
  }

  const Eigen::RowVectorXd y_mean = data.y().colwise().mean();
  const Matrix yc = data.y().rowwise() - y_mean;
  const Matrix basis = qr.householderQ() * Matrix::Identity(n, q);
  // X is centered, so span(X) is orthogonal to 1 and Q'Y = Q'Yc.
  const Matrix coords = basis.transpose() * yc;
  const Matrix resid = yc - basis * coords;

  SumOfSquares ss;
  ss.s_r = symmetrized(coords.transpose() * coords);
  ss.s_e = symmetrized(resid.transpose() * resid);
  ss.s_t = symmetrized(yc.transpose() * yc);
  ss.n = n;
  ss.q = q;
  return ss;
}

Matrix weighted_matrix(const SumOfSquares& ss, double w) {
  if (!(w >= 0.0 && w <= 1.0)) {
    std::ostringstream os;
    os << "weight w = " << w << " is outside [0, 1]";
    throw DomainError(os.str());
  }
  if (w == 0.0) return ss.s_r;
  if (w == 1.0) return ss.s_e;
  return (1.0 - w) * ss.s_r + w * ss.s_e;
}

void apply_sign_convention(Eigen::Ref<Vector> v) {
  Index best = 0;
  double best_abs = -1.0;
  for (Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a > best_abs) {
      best_abs = a;
      best = i;
    }
  }
  if (v.size() > 0 && v(best) < 0.0) v = -v;
}

SymEig sym_eig(const Matrix& m) {
  check_symmetric(m, 1e-8, "matrix");
  const Index p = m.rows();
  if (p < 1) throw ShapeError("sym_eig needs a non-empty matrix");

  const Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrized(m));
  if (solver.info() != Eigen::Success) throw std::runtime_error("symmetric eigensolver did not converge");

  SymEig out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  for (Index j = 0; j < p; ++j) apply_sign_convention(out.vectors.col(j));
  if (p >= 2) {
    const double gap = out.values(0) - out.values(1);
    out.leading_tie = gap <= 1e-12 * std::abs(m.trace());
  }
  return out;
}

std::uint64_t fingerprint(const SumOfSquares& ss) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const Matrix& m) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(m.data());
    const std::size_t len = static_cast<std::size_t>(m.size()) * sizeof(double);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  mix(ss.s_r);
  mix(ss.s_e);
  mix(ss.s_t);
  return h;
}

}  // namespace mareg
