#pragma once

#include "mareg/model_core.hpp"

#include <span>
#include <string>

namespace mareg {

/// The four scalars that drive the MSE bound and the optimal weight:
///   a = tr(Sigma^2) + tr(Sigma)^2,  b = lambda_1 + tr(Sigma),
///   c = ||X alpha||^2,              d = lambda_1 - lambda_2.
struct AbcdParams {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
  Index q = 0;
  Index n = 0;

  /// Throws DomainError / DegreesOfFreedomError if a, b, d <= 0, c < 0 or n <= 1 + q.
  void validate() const;

  /// Derives a, b, d from a descending spectrum of Sigma (at least two eigenvalues).
  static AbcdParams from_spectrum(std::span<const double> lambdas, double c, Index n, Index q);
};

/// Sample-based estimates feeding the plug-in weight.
struct PluginWeights {
  Matrix sigma_hat;
  double tr_sigma2_hat = 0.0;
  double a_hat = 0.0;
  double b_hat = 0.0;
  double c_hat = 0.0;
  double d_hat = 0.0;
  double lambda1_hat = 0.0;
  double lambda2_hat = 0.0;
  /// Formula value before clamping; NaN when the denominator vanishes.
  double w_hat_raw = 0.0;
  /// Clamped to [0, 2/3]; zero when the denominator is not positive.
  double w_hat = 0.0;
};

struct Gamma1Estimate {
  Vector vector;
  double weight_used = 0.0;
  /// lambda_1(S(w)) - lambda_2(S(w)); zero when p == 1.
  double leading_gap = 0.0;
  bool tie_flag = false;
};

/// Leading eigenvector of S(w) = (1 - w) S_R + w S_E.
/// w = 0, 0.5, 1 give the regression, total and residual eigenvectors.
Gamma1Estimate gamma1_hat(const SumOfSquares& ss, double w);

/// min over theta in {-1, 1} of ||theta * g_hat - g_true||^2, i.e. 2 - 2|<g_hat, g_true>|.
/// Both inputs must have unit norm within 1e-8.
double mse_up_to_sign(const Vector& g_hat, const Vector& g_true);

/// Minimizer of the MSE upper bound: (adq + 2bcd) / (2adq + 2bcd + ac).
double w_star(const AbcdParams& params);

/// Plug-in estimates of a, b, c, d and the resulting clamped weight. Requires n > 2 + q, p >= 2.
PluginWeights estimate_abcd(const SumOfSquares& ss);

struct ReducedRankFit {
  /// q x p coefficient matrix.
  Matrix coefficients;
  /// Column means of Y (X is centered).
  Vector intercept;
};

/// (X'X)^{-1} X'Y with intercept mean(Y).
ReducedRankFit ols_coefficients(const Dataset& data);

/// B_OLS g g' with intercept mean(Y).
ReducedRankFit reduced_rank_coefficients(const Dataset& data, const Vector& g_hat);

/// How gamma_1 is chosen inside each cross-validation fold.
struct WeightRule {
  enum class Kind { fixed, plugin, ols };
  Kind kind = Kind::fixed;
  double w = 0.0;

  static WeightRule fixed_weight(double w) { return {Kind::fixed, w}; }
  static WeightRule plugin() { return {Kind::plugin, 0.0}; }
  static WeightRule ols() { return {Kind::ols, 0.0}; }

  /// "T", "E", "R" for w = 0.5, 1, 0; "w=0.1" style otherwise; "plugin"; "OLS".
  std::string label() const;
};

/// Leave-one-out cross-validated mean squared prediction error, (1/n) sum_i ||y_i - yhat_i||^2.
///
/// Each fold re-centers X on the n - 1 training rows and applies the fold means
/// to the held-out row. The plug-in rule needs n - 1 > 2 + q in every fold.
double loo_cv_mspe(const Dataset& data, const WeightRule& rule);

}  // namespace mareg
