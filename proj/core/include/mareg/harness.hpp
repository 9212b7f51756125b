#pragma once

#include "mareg/simgen.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mareg {

/// One competitor in a Monte Carlo comparison.
struct EstimatorSpec {
  enum class Kind { fixed, plugin, oracle };
  Kind kind = Kind::fixed;
  double w = 0.0;

  static EstimatorSpec fixed_weight(double w) { return {Kind::fixed, w}; }
  static EstimatorSpec plugin() { return {Kind::plugin, 0.0}; }
  static EstimatorSpec oracle() { return {Kind::oracle, 0.0}; }

  /// "T", "E", "R" for w = 0.5, 1, 0; "w=0.3" otherwise; "plugin"; "oracle".
  std::string label() const;
  bool reports_weight() const { return kind != Kind::fixed; }
  bool operator==(const EstimatorSpec&) const = default;
};

/// T, E, R, w = 0.1, 0.2, 0.3, 0.4, 0.6, plugin, oracle.
std::vector<EstimatorSpec> default_estimators();

/// Fixed-weight estimators for `weights` in display order (T, E, R first, then ascending),
/// followed by plugin and oracle.
std::vector<EstimatorSpec> estimators_for_weights(std::vector<double> weights);

struct ScenarioPoint {
  std::string label;
  ModelSpec spec;
};

/// Called once per (point, replication, estimator) with the fingerprint of the
/// SumOfSquares that estimator saw. May be invoked from several threads at once.
using ReplicationObserver =
    std::function<void(std::size_t point, std::size_t replication, std::size_t estimator,
                       std::uint64_t ss_fingerprint)>;

struct ExperimentPlan {
  std::vector<ScenarioPoint> points;
  std::vector<EstimatorSpec> estimators;
  std::size_t replications = 200;
  std::uint64_t master_seed = 0;
  /// 0 selects std::thread::hardware_concurrency().
  unsigned workers = 0;
  /// Upper limit on estimate_cost(); 0 disables the guard.
  double cost_limit = 1e12;
  ReplicationObserver observer;

  void validate() const;
};

/// Rough floating-point operation count of a plan, used by the budget guard.
double estimate_cost(const ExperimentPlan& plan);

struct McCell {
  double mean_mse = 0.0;
  double se_mse = 0.0;
  /// Average weight used, for plugin and oracle estimators.
  std::optional<double> mean_weight;
  bool operator==(const McCell&) const = default;
};

struct McResult {
  std::vector<std::string> point_labels;
  std::vector<EstimatorSpec> estimators;
  /// cells[estimator][point].
  std::vector<std::vector<McCell>> cells;
  std::size_t replications = 0;
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> point_seeds;
  double wall_seconds = 0.0;

  const McCell& cell(std::size_t estimator, std::size_t point) const { return cells.at(estimator).at(point); }
  /// Index of the estimator with this label; throws std::out_of_range if absent.
  std::size_t estimator_index(const std::string& label) const;
};

/// Runs every replication of every scenario point. Each replication draws one
/// dataset from substream (point seed, replication), computes its sums of
/// squares once, and scores all estimators on it. The oracle weight uses the
/// true spectrum with c = ||X alpha||^2 of the realized design.
///
/// Results do not depend on the worker count.
McResult run_experiment(const ExperimentPlan& plan);

enum class TrendVerdict { decreasing_to_zero, non_vanishing, inconclusive };
std::string to_string(TrendVerdict verdict);

/// "decreasing-to-zero" when means strictly decrease over the grid and the last
/// is below a quarter of the first; "non-vanishing" when the last mean exceeds 0.5.
TrendVerdict classify_trend(const std::vector<double>& means);

struct SweepResult {
  McResult result;
  std::vector<TrendVerdict> verdicts;  // one per estimator
};

/// Plan that evaluates `regime` on every grid point; point j uses seed derive_seed(seed, scenario, j).
ExperimentPlan regime_plan(const RegimeSpec& regime, std::vector<EstimatorSpec> estimators,
                           std::size_t replications, std::uint64_t seed);

/// Runs `regime` over its size grid (at least three increasing points) and classifies each estimator.
SweepResult consistency_sweep(const RegimeSpec& regime, std::vector<EstimatorSpec> estimators,
                              std::size_t replications, std::uint64_t seed, unsigned workers = 0);

}  // namespace mareg
