#include "mareg/bounds.hpp"

#include "mareg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mareg {
namespace {

void check_weight(double w) {
  if (!(w >= 0.0 && w <= 1.0)) {
    std::ostringstream os;
    os << "weight w = " << w << " is outside [0, 1]";
    throw DomainError(os.str());
  }
}

// Bound with the validation already done; hot path of the grid search.
double bound_unchecked(const AbcdParams& prm, double w) {
  const double n = static_cast<double>(prm.n);
  const double q = static_cast<double>(prm.q);
  const double one_minus = 1.0 - w;
  const double num =
      8.0 * prm.a * (q * (1.0 - 2.0 * w) / n + (n - 1.0) / n * w * w) +
      16.0 * prm.b * prm.c * one_minus * one_minus / n;
  const double den = prm.d * (q / n + (n - 1.0 - 2.0 * q) / n * w) + prm.c * one_minus / n;
  return num / (n * den * den);
}

}  // namespace

double lemma1_fluctuation(double sigma_tr, double sigma_tr2, double lambda1, double c, Index n,
                          Index q, double w) {
  check_weight(w);
  if (q < 1 || n <= 1 + q) throw DegreesOfFreedomError("lemma1_fluctuation needs n > 1 + q");
  if (!(sigma_tr > 0.0 && sigma_tr2 > 0.0 && lambda1 > 0.0 && c >= 0.0)) {
    throw DomainError("lemma1_fluctuation needs tr(Sigma), tr(Sigma^2), lambda_1 > 0 and c >= 0");
  }
  const double nd = static_cast<double>(n);
  const double qd = static_cast<double>(q);
  const double one_minus = 1.0 - w;
  return (qd * (1.0 - 2.0 * w) + (nd - 1.0) * w * w) * (sigma_tr2 + sigma_tr * sigma_tr) +
         2.0 * one_minus * one_minus * (lambda1 + sigma_tr) * c;
}

double mse_upper_bound(const AbcdParams& params, double w) {
  params.validate();
  check_weight(w);
  return bound_unchecked(params, w);
}

double mse_upper_bound(const BoundInputs& inputs) { return mse_upper_bound(inputs.params, inputs.w); }

double grid_argmin_bound(const AbcdParams& params, double step) {
  params.validate();
  if (!(step > 0.0 && step <= 0.01)) {
    std::ostringstream os;
    os << "grid step " << step << " must lie in (0, 0.01]";
    throw DomainError(os.str());
  }
  const double cells = 1.0 / step;
  const double rounded = std::round(cells);
  const auto last = static_cast<long long>(std::abs(cells - rounded) < 1e-9 * cells ? rounded
                                                                                    : std::floor(cells));
  long long best = 0;
  double best_value = bound_unchecked(params, 0.0);
  for (long long k = 1; k <= last; ++k) {
    const double w = std::min(1.0, static_cast<double>(k) * step);
    const double value = bound_unchecked(params, w);
    if (value < best_value) {
      best_value = value;
      best = k;
    }
  }
  return std::min(1.0, static_cast<double>(best) * step);
}

}  // namespace mareg
