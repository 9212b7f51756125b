#include "mareg/harness.hpp"

#include "mareg/errors.hpp"
#include "mareg/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace mareg {
namespace {

struct PointOutcome {
  // Row-major [replication][estimator].
  std::vector<double> mse;
  std::vector<double> weight;
};

unsigned resolve_workers(unsigned requested, std::size_t jobs) {
  unsigned w = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  return static_cast<unsigned>(std::min<std::size_t>(w, std::max<std::size_t>(jobs, 1)));
}

void run_replication(const ExperimentPlan& plan, std::size_t point, std::size_t rep,
                     PointOutcome& out) {
  const ModelSpec& spec = plan.points[point].spec;
  const SimulatedData sim = gen_dataset(spec, rep);
  const SumOfSquares ss = sums_of_squares(sim.data);

  std::optional<double> plugin_w;
  std::optional<double> oracle_w;
  const std::size_t k = plan.estimators.size();
  for (std::size_t e = 0; e < k; ++e) {
    const EstimatorSpec& est = plan.estimators[e];
    double w = est.w;
    if (est.kind == EstimatorSpec::Kind::plugin) {
      if (!plugin_w) plugin_w = estimate_abcd(ss).w_hat;
      w = *plugin_w;
    } else if (est.kind == EstimatorSpec::Kind::oracle) {
      if (!oracle_w) oracle_w = w_star(spec.oracle_params(sim.c));
      w = *oracle_w;
    }
    if (plan.observer) plan.observer(point, rep, e, fingerprint(ss));
    out.mse[rep * k + e] = mse_up_to_sign(gamma1_hat(ss, w).vector, sim.gamma1);
    out.weight[rep * k + e] = w;
  }
}

}  // namespace

std::string EstimatorSpec::label() const {
  switch (kind) {
    case Kind::plugin:
      return "plugin";
    case Kind::oracle:
      return "oracle";
    case Kind::fixed:
      break;
  }
  return WeightRule::fixed_weight(w).label();
}

std::vector<EstimatorSpec> default_estimators() {
  return estimators_for_weights({0.5, 1.0, 0.0, 0.1, 0.2, 0.3, 0.4, 0.6});
}

std::vector<EstimatorSpec> estimators_for_weights(std::vector<double> weights) {
  std::vector<EstimatorSpec> out;
  for (double anchor : {0.5, 1.0, 0.0}) {
    if (std::find(weights.begin(), weights.end(), anchor) != weights.end()) {
      out.push_back(EstimatorSpec::fixed_weight(anchor));
    }
  }
  std::sort(weights.begin(), weights.end());
  weights.erase(std::unique(weights.begin(), weights.end()), weights.end());
  for (double w : weights) {
    if (w != 0.5 && w != 1.0 && w != 0.0) out.push_back(EstimatorSpec::fixed_weight(w));
  }
  out.push_back(EstimatorSpec::plugin());
  out.push_back(EstimatorSpec::oracle());
  return out;
}

void ExperimentPlan::validate() const {
  if (replications < 1) throw ValidationError("replications must be at least 1");
  if (estimators.empty()) throw ValidationError("estimator list is empty");
  if (points.empty()) throw ValidationError("experiment has no scenario points");
  bool needs_plugin_df = false;
  for (const auto& est : estimators) {
    if (est.kind == EstimatorSpec::Kind::fixed && !(est.w >= 0.0 && est.w <= 1.0)) {
      std::ostringstream os;
      os << "fixed weight " << est.w << " is outside [0, 1]";
      throw DomainError(os.str());
    }
    if (est.kind == EstimatorSpec::Kind::plugin) needs_plugin_df = true;
  }
  for (const auto& pt : points) {
    pt.spec.validate();
    if (pt.spec.p < 2) throw ShapeError("scenario " + pt.label + " needs p >= 2");
    if (needs_plugin_df && pt.spec.n <= 2 + pt.spec.q) {
      std::ostringstream os;
      os << "scenario " << pt.label << " violates n > 2 + q (n = " << pt.spec.n
         << ", q = " << pt.spec.q << ") required by the plug-in estimator";
      throw DegreesOfFreedomError(os.str());
    }
  }
}

double estimate_cost(const ExperimentPlan& plan) {
  double total = 0.0;
  const double k = static_cast<double>(plan.estimators.size());
  for (const auto& pt : plan.points) {
    const double n = static_cast<double>(pt.spec.n);
    const double p = static_cast<double>(pt.spec.p);
    const double q = static_cast<double>(pt.spec.q);
    const double generate = 20.0 * n * (p + q) + 2.0 * n * p * p;
    const double sums = 4.0 * n * q * (p + q) + 4.0 * n * p * p;
    const double eigen = (k + 1.0) * 9.0 * p * p * p;
    total += generate + sums + eigen;
  }
  return total * static_cast<double>(plan.replications);
}

std::size_t McResult::estimator_index(const std::string& label) const {
  for (std::size_t e = 0; e < estimators.size(); ++e) {
    if (estimators[e].label() == label) return e;
  }
  throw std::out_of_range("no estimator labelled " + label);
}

McResult run_experiment(const ExperimentPlan& plan) {
  plan.validate();
  const double cost = estimate_cost(plan);
  if (plan.cost_limit > 0.0 && cost > plan.cost_limit) {
    std::ostringstream os;
    os << "experiment plan is too expensive: estimated " << cost << " flops exceeds the limit of "
       << plan.cost_limit << " (raise the limit or reduce replications/sizes)";
    throw CostLimitError(os.str(), cost);
  }

  const auto start = std::chrono::steady_clock::now();
  const std::size_t n_points = plan.points.size();
  const std::size_t reps = plan.replications;
  const std::size_t k = plan.estimators.size();

  std::vector<PointOutcome> outcomes(n_points);
  for (auto& o : outcomes) {
    o.mse.assign(reps * k, 0.0);
    o.weight.assign(reps * k, 0.0);
  }

  const std::size_t jobs = n_points * reps;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t job = next.fetch_add(1);
      if (job >= jobs) return;
      try {
        run_replication(plan, job / reps, job % reps, outcomes[job / reps]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(jobs);
        return;
      }
    }
  };
  const unsigned n_workers = resolve_workers(plan.workers, jobs);
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (unsigned t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  McResult result;
  result.estimators = plan.estimators;
  result.replications = reps;
  result.master_seed = plan.master_seed;
  result.cells.assign(k, std::vector<McCell>(n_points));
  for (std::size_t j = 0; j < n_points; ++j) {
    result.point_labels.push_back(plan.points[j].label);
    result.point_seeds.push_back(plan.points[j].spec.master_seed);
    const PointOutcome& o = outcomes[j];
    for (std::size_t e = 0; e < k; ++e) {
      double sum = 0.0;
      double wsum = 0.0;
      for (std::size_t r = 0; r < reps; ++r) {
        sum += o.mse[r * k + e];
        wsum += o.weight[r * k + e];
      }
      const double mean = sum / static_cast<double>(reps);
      double ss = 0.0;
      for (std::size_t r = 0; r < reps; ++r) {
        const double dev = o.mse[r * k + e] - mean;
        ss += dev * dev;
      }
      McCell& cell = result.cells[e][j];
      cell.mean_mse = mean;
      cell.se_mse = reps > 1 ? std::sqrt(ss / static_cast<double>(reps - 1) / static_cast<double>(reps)) : 0.0;
      if (plan.estimators[e].reports_weight()) cell.mean_weight = wsum / static_cast<double>(reps);
    }
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::string to_string(TrendVerdict verdict) {
  switch (verdict) {
    case TrendVerdict::decreasing_to_zero:
      return "decreasing-to-zero";
    case TrendVerdict::non_vanishing:
      return "non-vanishing";
    case TrendVerdict::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

TrendVerdict classify_trend(const std::vector<double>& means) {
  if (means.size() < 2) return TrendVerdict::inconclusive;
  bool decreasing = true;
  for (std::size_t i = 1; i < means.size(); ++i) decreasing = decreasing && means[i] < means[i - 1];
  if (decreasing && means.back() < means.front() / 4.0) return TrendVerdict::decreasing_to_zero;
  if (means.back() > 0.5) return TrendVerdict::non_vanishing;
  return TrendVerdict::inconclusive;
}

ExperimentPlan regime_plan(const RegimeSpec& regime, std::vector<EstimatorSpec> estimators,
                           std::size_t replications, std::uint64_t seed) {
  regime.validate();
  ExperimentPlan plan;
  plan.estimators = std::move(estimators);
  plan.replications = replications;
  plan.master_seed = seed;
  for (std::size_t j = 0; j < regime.size_grid.size(); ++j) {
    const SizePoint& pt = regime.size_grid[j];
    std::ostringstream label;
    if (regime.kind == RegimeSpec::Kind::large_p_large_n) {
      label << "p=" << pt.p << " (n=" << pt.n << ")";
    } else {
      label << "n=" << pt.n;
    }
    plan.points.push_back({label.str(), regime.point_spec(j, derive_seed(seed, StreamTag::scenario, j))});
  }
  return plan;
}

SweepResult consistency_sweep(const RegimeSpec& regime, std::vector<EstimatorSpec> estimators,
                              std::size_t replications, std::uint64_t seed, unsigned workers) {
  regime.validate();
  if (regime.size_grid.size() < 3) throw ValidationError("consistency sweep needs at least three grid points");
  const bool by_p = regime.kind == RegimeSpec::Kind::large_p_large_n;
  for (std::size_t j = 1; j < regime.size_grid.size(); ++j) {
    const auto& prev = regime.size_grid[j - 1];
    const auto& cur = regime.size_grid[j];
    if (by_p ? cur.p <= prev.p : cur.n <= prev.n) {
      throw ValidationError("consistency sweep grid must be strictly increasing");
    }
  }
  ExperimentPlan plan = regime_plan(regime, std::move(estimators), replications, seed);
  plan.workers = workers;
  SweepResult sweep;
  sweep.result = run_experiment(plan);
  for (std::size_t e = 0; e < sweep.result.estimators.size(); ++e) {
    std::vector<double> means;
    for (const auto& cell : sweep.result.cells[e]) means.push_back(cell.mean_mse);
    sweep.verdicts.push_back(classify_trend(means));
  }
  return sweep;
}

}  // namespace mareg
