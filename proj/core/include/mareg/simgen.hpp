#pragma once

#include "mareg/estimators.hpp"
#include "mareg/model_core.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mareg {

/// Ground truth for Y = 1 mu' + X alpha gamma_1' + E, rows of E ~ N_p(0, Gamma Lambda Gamma').
struct ModelSpec {
  Index p = 0;
  Index q = 0;
  Index n = 0;
  Vector mu;
  Vector alpha;
  /// Descending, strictly positive eigenvalues of Sigma.
  Vector lambdas;
  /// Orthogonal p x p matrix whose columns are the eigenvectors of Sigma.
  Matrix gamma_basis;
  std::uint64_t master_seed = 0;

  void validate() const;
  Matrix sigma() const;
  Vector gamma1() const { return gamma_basis.col(0); }
  /// True (a, b, c, d) for a realized ||X alpha||^2 = c.
  AbcdParams oracle_params(double c) const;
};

struct SimulatedData {
  Dataset data;
  Vector gamma1;
  double c = 0.0;  // ||X alpha||^2 of the realized design
};

struct SizePoint {
  Index n = 0;
  Index p = 0;
};

/// Asymptotic regime plus the grid of sizes it is evaluated on.
struct RegimeSpec {
  enum class Kind { traditional, weak_identifiability, large_p_large_n };

  Kind kind = Kind::traditional;
  /// lambda_1 - lambda_2 = n^-eta (weak identifiability).
  double eta = 0.0;
  /// n = floor(p^delta) (large p, large n).
  double delta = 0.8;
  /// lambda_1 = p^beta, lambda_2 = p^lambda2_exponent (large p, large n).
  double beta = 0.8;
  double lambda2_exponent = 0.0;
  Index q = 5;
  std::vector<SizePoint> size_grid;

  static RegimeSpec traditional(std::vector<Index> ns, Index p = 10);
  static RegimeSpec weak_identifiability(double eta, std::vector<Index> ns, Index p = 10);
  static RegimeSpec large_p_large_n(double delta, double beta, double lambda2_exponent,
                                    std::vector<Index> ps);

  void validate() const;
  /// Model for grid point `i`; alpha = 1_q, mu = 0, Gamma from random_gamma(p, seed).
  ModelSpec point_spec(std::size_t i, std::uint64_t seed) const;
};

/// Eigenvectors (sign-normalized) of the sample covariance of 2p i.i.d. N_p(0, I) draws.
Matrix random_gamma(Index p, std::uint64_t seed);

/// Centered n x q standard-normal design for replication `replication`.
Matrix draw_design(const ModelSpec& spec, std::uint64_t replication);

/// n x p matrix whose rows are i.i.d. N_p(0, Sigma), for replication `replication`.
Matrix draw_errors(const ModelSpec& spec, std::uint64_t replication);

/// One simulated dataset; X and E come from substreams keyed on (master_seed, replication).
SimulatedData gen_dataset(const ModelSpec& spec, std::uint64_t replication = 0);

/// p = 10, q = 5, alpha = 1_q, Lambda = diag(2, 1, ..., 1).
ModelSpec scenario_table1(Index n, std::uint64_t seed);

/// As scenario_table1 with lambda_1 = 1 + n^-eta.
ModelSpec scenario_table2(Index n, double eta, std::uint64_t seed);

enum class SpikeCase { weak_spike, strong_spike };

/// q = 5, n = floor(p^0.8), alpha = 1_q; (lambda_1, lambda_2) = (p^0.25, 1) or (p^0.8, p^0.4).
ModelSpec scenario_table3(Index p, SpikeCase spike, std::uint64_t seed);

/// floor(p^delta), robust to pow() landing just below an integer.
Index floor_power(Index p, double delta);

}  // namespace mareg
