#include "mareg/estimators.hpp"

#include "mareg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mareg {
namespace {

std::string fold_message(Index i, const std::exception& e) {
  std::ostringstream os;
  os << "fold " << i << " (held-out row " << i << "): " << e.what();
  return os.str();
}

}  // namespace

void AbcdParams::validate() const {
  if (!(a > 0.0) || !(b > 0.0) || !(d > 0.0) || !(c >= 0.0) || !std::isfinite(a) ||
      !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(d)) {
    std::ostringstream os;
    os << "invalid bound parameters: need a > 0, b > 0, c >= 0, d > 0; got a = " << a
       << ", b = " << b << ", c = " << c << ", d = " << d;
    throw DomainError(os.str());
  }
  if (q < 1 || n <= 1 + q) {
    std::ostringstream os;
    os << "need q >= 1 and n > 1 + q, got n = " << n << ", q = " << q;
    throw DegreesOfFreedomError(os.str());
  }
}

AbcdParams AbcdParams::from_spectrum(std::span<const double> lambdas, double c, Index n, Index q) {
  if (lambdas.size() < 2) throw ShapeError("spectrum needs at least two eigenvalues");
  double tr = 0.0;
  double tr2 = 0.0;
  for (double l : lambdas) {
    tr += l;
    tr2 += l * l;
  }
  AbcdParams params;
  params.a = tr2 + tr * tr;
  params.b = lambdas[0] + tr;
  params.c = c;
  params.d = lambdas[0] - lambdas[1];
  params.n = n;
  params.q = q;
  params.validate();
  return params;
}

Gamma1Estimate gamma1_hat(const SumOfSquares& ss, double w) {
  const SymEig eig = sym_eig(weighted_matrix(ss, w));
  Gamma1Estimate est;
  est.vector = eig.vectors.col(0);
  est.weight_used = w;
  est.leading_gap = eig.values.size() >= 2 ? eig.values(0) - eig.values(1) : 0.0;
  est.tie_flag = eig.leading_tie;
  return est;
}

double mse_up_to_sign(const Vector& g_hat, const Vector& g_true) {
  if (g_hat.size() != g_true.size()) {
    throw ShapeError("mse_up_to_sign: vectors have different lengths");
  }
  for (const Vector* v : {&g_hat, &g_true}) {
    const double norm = v->norm();
    if (!(std::abs(norm - 1.0) <= 1e-8)) {
      std::ostringstream os;
      os << "mse_up_to_sign: input is not unit norm (||v|| = " << norm << ")";
      throw DomainError(os.str());
    }
  }
  const double value = 2.0 - 2.0 * std::abs(g_hat.dot(g_true));
  return std::clamp(value, 0.0, 2.0);
}

double w_star(const AbcdParams& params) {
  params.validate();
  const double a = params.a;
  const double b = params.b;
  const double c = params.c;
  const double d = params.d;
  const double q = static_cast<double>(params.q);
  const double num = a * d * q + 2.0 * b * c * d;
  return num / (num + a * d * q + a * c);
}

PluginWeights estimate_abcd(const SumOfSquares& ss) {
  const Index n = ss.n;
  const Index q = ss.q;
  if (n <= 2 + q) {
    std::ostringstream os;
    os << "plug-in weight needs n > 2 + q, got n = " << n << ", q = " << q;
    throw DegreesOfFreedomError(os.str());
  }
  if (ss.p() < 2) throw ShapeError("plug-in weight needs p >= 2 responses");

  const double df = static_cast<double>(n - 1 - q);
  PluginWeights pw;
  pw.sigma_hat = ss.s_e / df;

  const double tr_se = ss.s_e.trace();
  // tr(S_E^2) = ||S_E||_F^2 for symmetric S_E.
  const double tr_se2 = ss.s_e.squaredNorm();
  pw.tr_sigma2_hat = (tr_se2 - tr_se * tr_se / df) /
                     (static_cast<double>(n + 1 - q) * static_cast<double>(n - 2 - q));

  const double tr_sigma = pw.sigma_hat.trace();
  const SymEig eig = sym_eig(pw.sigma_hat);
  pw.lambda1_hat = eig.values(0);
  pw.lambda2_hat = eig.values(1);

  pw.a_hat = pw.tr_sigma2_hat + tr_sigma * tr_sigma;
  pw.b_hat = pw.lambda1_hat + tr_sigma;
  pw.c_hat = ss.s_r.trace() - static_cast<double>(q) * tr_sigma;
  pw.d_hat = std::max(0.0, pw.lambda1_hat - pw.lambda2_hat);

  const double qd = static_cast<double>(q);
  const double num = pw.a_hat * pw.d_hat * qd + 2.0 * pw.b_hat * pw.c_hat * pw.d_hat;
  const double den = 2.0 * pw.a_hat * pw.d_hat * qd + 2.0 * pw.b_hat * pw.c_hat * pw.d_hat +
                     pw.a_hat * pw.c_hat;
  if (den > 0.0) {
    pw.w_hat_raw = num / den;
    pw.w_hat = std::clamp(pw.w_hat_raw, 0.0, 2.0 / 3.0);
  } else {
    pw.w_hat_raw = den == 0.0 ? std::numeric_limits<double>::quiet_NaN() : num / den;
    pw.w_hat = 0.0;
  }
  return pw;
}

ReducedRankFit ols_coefficients(const Dataset& data) {
  const Index q = data.q();
  const Eigen::HouseholderQR<Matrix> qr(data.x());
  const Matrix upper = qr.matrixQR().topRows(q).triangularView<Eigen::Upper>();
  const Vector sv = Eigen::JacobiSVD<Matrix>(upper).singularValues();
  const double ratio = sv(0) / sv(q - 1);
  if (!(ratio * ratio <= 1e12)) {
    std::ostringstream os;
    os << "X'X is singular or ill-conditioned for design " << data.n() << "x" << q
       << ": condition number " << ratio * ratio << " exceeds 1e12";
    throw RankDeficiencyError(os.str());
  }
  ReducedRankFit fit;
  fit.coefficients = qr.solve(data.y());
  fit.intercept = data.y().colwise().mean().transpose();
  return fit;
}

ReducedRankFit reduced_rank_coefficients(const Dataset& data, const Vector& g_hat) {
  if (g_hat.size() != data.p()) throw ShapeError("g_hat length must equal the number of responses");
  if (!(std::abs(g_hat.norm() - 1.0) <= 1e-8)) throw DomainError("g_hat must have unit norm");
  ReducedRankFit fit = ols_coefficients(data);
  fit.coefficients = (fit.coefficients * g_hat) * g_hat.transpose();
  return fit;
}

std::string WeightRule::label() const {
  switch (kind) {
    case Kind::plugin:
      return "plugin";
    case Kind::ols:
      return "OLS";
    case Kind::fixed:
      break;
  }
  if (w == 0.5) return "T";
  if (w == 1.0) return "E";
  if (w == 0.0) return "R";
  std::ostringstream os;
  os << "w=" << w;
  return os.str();
}

double loo_cv_mspe(const Dataset& data, const WeightRule& rule) {
  const Index n = data.n();
  const Index q = data.q();
  const Index p = data.p();
  const Index fold_n = n - 1;
  const Index needed = rule.kind == WeightRule::Kind::plugin ? 2 + q : 1 + q;
  if (fold_n <= needed) {
    std::ostringstream os;
    os << "fold 0 (held-out row 0) has " << fold_n << " training rows; rule " << rule.label()
       << " needs more than " << needed << " (n = " << n << ", q = " << q << ")";
    throw DegreesOfFreedomError(os.str());
  }
  if (rule.kind == WeightRule::Kind::fixed && !(rule.w >= 0.0 && rule.w <= 1.0)) {
    throw DomainError("fixed weight must lie in [0, 1]");
  }

  double total = 0.0;
  Matrix y_fold(fold_n, p);
  Matrix x_fold(fold_n, q);
  for (Index i = 0; i < n; ++i) {
    if (i > 0) {
      y_fold.topRows(i) = data.y().topRows(i);
      x_fold.topRows(i) = data.x().topRows(i);
    }
    if (i < n - 1) {
      y_fold.bottomRows(n - 1 - i) = data.y().bottomRows(n - 1 - i);
      x_fold.bottomRows(n - 1 - i) = data.x().bottomRows(n - 1 - i);
    }
    const Eigen::RowVectorXd x_mean = x_fold.colwise().mean();
    try {
      const Dataset fold(y_fold, x_fold.rowwise() - x_mean);
      ReducedRankFit fit;
      if (rule.kind == WeightRule::Kind::ols) {
        fit = ols_coefficients(fold);
      } else {
        const SumOfSquares ss = sums_of_squares(fold);
        const double w = rule.kind == WeightRule::Kind::plugin ? estimate_abcd(ss).w_hat : rule.w;
        fit = reduced_rank_coefficients(fold, gamma1_hat(ss, w).vector);
      }
      const Eigen::RowVectorXd x_held = data.x().row(i) - x_mean;
      const Eigen::RowVectorXd y_pred = fit.intercept.transpose() + x_held * fit.coefficients;
      total += (data.y().row(i) - y_pred).squaredNorm();
    } catch (const RankDeficiencyError& e) {
      throw RankDeficiencyError(fold_message(i, e));
    } catch (const ValidationError& e) {
      throw DegreesOfFreedomError(fold_message(i, e));
    }
  }
  return total / static_cast<double>(n);
}

}  // namespace mareg
