#include "mareg/simgen.hpp"

#include "mareg/errors.hpp"
#include "mareg/rng.hpp"

#include <cmath>
#include <sstream>

namespace mareg {
namespace {

ModelSpec make_spec(Index n, Index p, Index q, Vector lambdas, std::uint64_t seed) {
  ModelSpec spec;
  spec.p = p;
  spec.q = q;
  spec.n = n;
  spec.mu = Vector::Zero(p);
  spec.alpha = Vector::Ones(q);
  spec.lambdas = std::move(lambdas);
  spec.gamma_basis = random_gamma(p, seed);
  spec.master_seed = seed;
  spec.validate();
  return spec;
}

void require_plugin_df(Index n, Index q) {
  if (n <= 2 + q) {
    std::ostringstream os;
    os << "scenario needs n > 2 + q = " << 2 + q << ", got n = " << n;
    throw DegreesOfFreedomError(os.str());
  }
}

Vector spiked(Index p, double l1, double l2) {
  Vector lambdas = Vector::Ones(p);
  lambdas(0) = l1;
  if (p > 1) lambdas(1) = l2;
  return lambdas;
}

}  // namespace

void ModelSpec::validate() const {
  if (p < 1 || q < 1) throw ShapeError("model needs p >= 1 and q >= 1");
  if (n <= 1 + q) {
    std::ostringstream os;
    os << "model needs n > 1 + q, got n = " << n << ", q = " << q;
    throw DegreesOfFreedomError(os.str());
  }
  if (mu.size() != p || alpha.size() != q || lambdas.size() != p || gamma_basis.rows() != p ||
      gamma_basis.cols() != p) {
    throw ShapeError("model parameter sizes do not match p and q");
  }
  for (Index i = 0; i < p; ++i) {
    if (!(lambdas(i) > 0.0)) throw DomainError("eigenvalues must be strictly positive");
    if (i > 0 && lambdas(i) > lambdas(i - 1)) throw DomainError("eigenvalues must be non-increasing");
  }
  const double orth = (gamma_basis.transpose() * gamma_basis - Matrix::Identity(p, p)).cwiseAbs().maxCoeff();
  if (!(orth <= 1e-8)) throw DomainError("Gamma is not orthogonal");
}

Matrix ModelSpec::sigma() const {
  return gamma_basis * lambdas.asDiagonal() * gamma_basis.transpose();
}

AbcdParams ModelSpec::oracle_params(double c) const {
  const std::vector<double> spectrum(lambdas.data(), lambdas.data() + lambdas.size());
  return AbcdParams::from_spectrum(spectrum, c, n, q);
}

RegimeSpec RegimeSpec::traditional(std::vector<Index> ns, Index p) {
  RegimeSpec r;
  r.kind = Kind::traditional;
  for (Index n : ns) r.size_grid.push_back({n, p});
  return r;
}

RegimeSpec RegimeSpec::weak_identifiability(double eta, std::vector<Index> ns, Index p) {
  RegimeSpec r;
  r.kind = Kind::weak_identifiability;
  r.eta = eta;
  for (Index n : ns) r.size_grid.push_back({n, p});
  return r;
}

RegimeSpec RegimeSpec::large_p_large_n(double delta, double beta, double lambda2_exponent,
                                       std::vector<Index> ps) {
  RegimeSpec r;
  r.kind = Kind::large_p_large_n;
  r.delta = delta;
  r.beta = beta;
  r.lambda2_exponent = lambda2_exponent;
  for (Index p : ps) r.size_grid.push_back({floor_power(p, delta), p});
  return r;
}

void RegimeSpec::validate() const {
  if (size_grid.empty()) throw ValidationError("regime size grid is empty");
  if (q < 1) throw DomainError("regime needs q >= 1");
  switch (kind) {
    case Kind::traditional:
      break;
    case Kind::weak_identifiability:
      if (!(eta > 0.0)) throw DomainError("weak identifiability needs eta > 0");
      for (const auto& pt : size_grid) {
        if (pt.p != size_grid.front().p) throw ValidationError("weak identifiability fixes p across the grid");
      }
      break;
    case Kind::large_p_large_n:
      if (!(delta > 0.0)) throw DomainError("large p, large n needs delta > 0");
      if (!(beta <= 1.0)) throw DomainError("large p, large n needs beta <= 1");
      if (!(lambda2_exponent < beta)) throw DomainError("need lambda2_exponent < beta so that lambda_1 > lambda_2");
      for (const auto& pt : size_grid) {
        if (pt.n != floor_power(pt.p, delta)) throw ValidationError("large p, large n derives n = floor(p^delta)");
      }
      break;
  }
  for (const auto& pt : size_grid) {
    if (pt.p < 2) throw ShapeError("regime grid points need p >= 2");
    require_plugin_df(pt.n, q);
  }
}

ModelSpec RegimeSpec::point_spec(std::size_t i, std::uint64_t seed) const {
  validate();
  if (i >= size_grid.size()) throw std::out_of_range("regime grid index out of range");
  const SizePoint pt = size_grid[i];
  const double nd = static_cast<double>(pt.n);
  const double pd = static_cast<double>(pt.p);
  switch (kind) {
    case Kind::traditional:
      return make_spec(pt.n, pt.p, q, spiked(pt.p, 2.0, 1.0), seed);
    case Kind::weak_identifiability:
      return make_spec(pt.n, pt.p, q, spiked(pt.p, 1.0 + std::pow(nd, -eta), 1.0), seed);
    case Kind::large_p_large_n:
      return make_spec(pt.n, pt.p, q,
                       spiked(pt.p, std::pow(pd, beta), std::pow(pd, lambda2_exponent)), seed);
  }
  throw std::logic_error("unknown regime kind");
}

Index floor_power(Index p, double delta) {
  const double value = std::pow(static_cast<double>(p), delta);
  return static_cast<Index>(std::floor(value + 1e-9 * value));
}

Matrix random_gamma(Index p, std::uint64_t seed) {
  if (p < 2) throw ShapeError("random_gamma needs p >= 2");
  Rng rng(seed, StreamTag::basis, 0);
  const Matrix z = rng.normal_matrix(2 * p, p);
  const Matrix zc = center_columns(z);
  const Matrix cov = (zc.transpose() * zc) / static_cast<double>(2 * p - 1);
  return sym_eig(cov).vectors;
}

Matrix draw_design(const ModelSpec& spec, std::uint64_t replication) {
  Rng rng(spec.master_seed, StreamTag::design, replication);
  return center_columns(rng.normal_matrix(spec.n, spec.q));
}

Matrix draw_errors(const ModelSpec& spec, std::uint64_t replication) {
  Rng rng(spec.master_seed, StreamTag::errors, replication);
  const Matrix z = rng.normal_matrix(spec.n, spec.p);
  // Row e_i' = z_i' Lambda^{1/2} Gamma', so Cov(e_i) = Gamma Lambda Gamma'.
  return z * spec.lambdas.cwiseSqrt().asDiagonal() * spec.gamma_basis.transpose();
}

SimulatedData gen_dataset(const ModelSpec& spec, std::uint64_t replication) {
  Matrix x = draw_design(spec, replication);
  const Vector x_alpha = x * spec.alpha;
  const Vector g1 = spec.gamma1();
  Matrix y = draw_errors(spec, replication);
  y += x_alpha * g1.transpose();
  y.rowwise() += spec.mu.transpose();
  const double c = x_alpha.squaredNorm();
  return SimulatedData{Dataset(std::move(y), std::move(x)), g1, c};
}

ModelSpec scenario_table1(Index n, std::uint64_t seed) {
  constexpr Index p = 10;
  constexpr Index q = 5;
  require_plugin_df(n, q);
  return make_spec(n, p, q, spiked(p, 2.0, 1.0), seed);
}

ModelSpec scenario_table2(Index n, double eta, std::uint64_t seed) {
  if (!(eta > 0.0)) throw DomainError("eta must be positive");
  constexpr Index p = 10;
  constexpr Index q = 5;
  require_plugin_df(n, q);
  return make_spec(n, p, q, spiked(p, 1.0 + std::pow(static_cast<double>(n), -eta), 1.0), seed);
}

ModelSpec scenario_table3(Index p, SpikeCase spike, std::uint64_t seed) {
  constexpr Index q = 5;
  if (p < 3) throw ShapeError("scenario_table3 needs p >= 3");
  const Index n = floor_power(p, 0.8);
  require_plugin_df(n, q);
  const double pd = static_cast<double>(p);
  const Vector lambdas = spike == SpikeCase::weak_spike
                             ? spiked(p, std::pow(pd, 0.25), 1.0)
                             : spiked(p, std::pow(pd, 0.8), std::pow(pd, 0.4));
  return make_spec(n, p, q, lambdas, seed);
}

}  // namespace mareg
