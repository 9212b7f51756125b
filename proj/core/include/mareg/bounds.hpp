#pragma once

#include "mareg/estimators.hpp"

namespace mareg {

struct BoundInputs {
  AbcdParams params;
  double w = 0.0;
};

/// Closed form of E ||S(w) - E S(w)||_F^2 for Gaussian errors and a fixed design:
///   {q(1 - 2w) + (n - 1)w^2}{tr(Sigma^2) + tr(Sigma)^2} + 2(1 - w)^2 (lambda_1 + tr Sigma) c.
double lemma1_fluctuation(double sigma_tr, double sigma_tr2, double lambda1, double c, Index n,
                          Index q, double w);

/// Upper bound on the sign-invariant MSE of gamma1_hat(w):
///   [8a{q(1 - 2w) + (n - 1)w^2} + 16bc(1 - w)^2] / [d{q + (n - 1 - 2q)w} + c(1 - w)]^2.
/// Evaluated with numerator and denominator pre-divided by n.
double mse_upper_bound(const BoundInputs& inputs);
double mse_upper_bound(const AbcdParams& params, double w);

/// Grid point in {0, step, 2 step, ..., 1} with the smallest bound; lowest index wins ties.
/// Requires 0 < step <= 0.01.
double grid_argmin_bound(const AbcdParams& params, double step);

}  // namespace mareg
