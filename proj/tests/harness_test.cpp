#include "mareg/errors.hpp"
#include "mareg/harness.hpp"
#include "mareg/rng.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <mutex>

namespace mareg {
namespace {

ExperimentPlan table1_plan(std::vector<Index> ns, std::size_t reps, std::uint64_t seed) {
  return regime_plan(RegimeSpec::traditional(std::move(ns)), default_estimators(), reps, seed);
}

void expect_identical(const McResult& a, const McResult& b) {
  EXPECT_EQ(a.point_labels, b.point_labels);
  EXPECT_EQ(a.point_seeds, b.point_seeds);
  EXPECT_EQ(a.estimators, b.estimators);
  ASSERT_EQ(a.cells.size(), b.cells.size());
  for (std::size_t e = 0; e < a.cells.size(); ++e) {
    for (std::size_t j = 0; j < a.cells[e].size(); ++j) {
      EXPECT_EQ(a.cells[e][j].mean_mse, b.cells[e][j].mean_mse);
      EXPECT_EQ(a.cells[e][j].se_mse, b.cells[e][j].se_mse);
      EXPECT_EQ(a.cells[e][j].mean_weight, b.cells[e][j].mean_weight);
    }
  }
}

TEST(Estimators, DefaultRowSet) {
  std::vector<std::string> labels;
  for (const auto& e : default_estimators()) labels.push_back(e.label());
  const std::vector<std::string> expected{"T", "E", "R", "w=0.1", "w=0.2", "w=0.3", "w=0.4", "w=0.6", "plugin", "oracle"};
  EXPECT_EQ(labels, expected);
}

TEST(Estimators, CustomWeightsAreOrderedAndDeduplicated) {
  std::vector<std::string> labels;
  for (const auto& e : estimators_for_weights({0.7, 0.0, 0.25, 0.7})) labels.push_back(e.label());
  const std::vector<std::string> expected{"R", "w=0.25", "w=0.7", "plugin", "oracle"};
  EXPECT_EQ(labels, expected);
}

TEST(RunExperiment, ReproducibleWithSingleReplication) {
  const ExperimentPlan plan = table1_plan({20, 50}, 1, 123);
  expect_identical(run_experiment(plan), run_experiment(plan));
}

TEST(RunExperiment, ThreadCountInvariance) {
  ExperimentPlan plan = table1_plan({20, 50, 100}, 40, 7);
  plan.workers = 1;
  const McResult one = run_experiment(plan);
  for (unsigned k : {2u, 3u, 8u}) {
    plan.workers = k;
    expect_identical(one, run_experiment(plan));
  }
}

TEST(RunExperiment, EstimatorsShareTheReplicationDataset) {
  ExperimentPlan plan = table1_plan({20, 30}, 12, 9);
  plan.workers = 3;
  std::mutex mu;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::uint64_t>> seen;
  plan.observer = [&](std::size_t point, std::size_t rep, std::size_t, std::uint64_t fp) {
    std::lock_guard lock(mu);
    seen[{point, rep}].push_back(fp);
  };
  (void)run_experiment(plan);
  ASSERT_EQ(seen.size(), 24u);
  for (const auto& [key, fps] : seen) {
    ASSERT_EQ(fps.size(), plan.estimators.size());
    EXPECT_TRUE(std::all_of(fps.begin(), fps.end(), [&](auto f) { return f == fps.front(); }));
    const auto& spec = plan.points[key.first].spec;
    EXPECT_EQ(fps.front(), fingerprint(sums_of_squares(gen_dataset(spec, key.second).data)));
  }
}

TEST(RunExperiment, StandardErrorShrinksWithReplications) {
  const std::vector<Index> ns{20, 30, 50, 100, 200};
  const McResult small = run_experiment(table1_plan(ns, 300, 17));
  const McResult large = run_experiment(table1_plan(ns, 600, 17));
  std::vector<double> ratios;
  for (std::size_t e = 0; e < small.cells.size(); ++e) {
    for (std::size_t j = 0; j < ns.size(); ++j) ratios.push_back(large.cell(e, j).se_mse / small.cell(e, j).se_mse);
  }
  std::nth_element(ratios.begin(), ratios.begin() + ratios.size() / 2, ratios.end());
  const double median = ratios[ratios.size() / 2];
  EXPECT_GE(median, 0.6);
  EXPECT_LE(median, 0.82);
}

TEST(RunExperiment, OracleWeightIsCompetitiveAtLargeN) {
  const McResult r = run_experiment(table1_plan({500}, 1000, 20240611));
  const double oracle = r.cell(r.estimator_index("oracle"), 0).mean_mse;
  EXPECT_LE(oracle, 1.05 * r.cell(r.estimator_index("T"), 0).mean_mse);
  EXPECT_LE(oracle, 1.05 * r.cell(r.estimator_index("R"), 0).mean_mse);
}

TEST(RunExperiment, NonIdentifiableModelGivesFlatLargeErrors) {
  ModelSpec spec = scenario_table1(40, 3);
  spec.lambdas = Vector::Ones(10);
  spec.alpha = Vector::Zero(5);
  ExperimentPlan plan;
  plan.points = {{"flat", spec}};
  plan.estimators = {EstimatorSpec::fixed_weight(0.0), EstimatorSpec::fixed_weight(0.3), EstimatorSpec::fixed_weight(0.5),
                     EstimatorSpec::fixed_weight(1.0), EstimatorSpec::plugin()};
  plan.replications = 400;
  plan.master_seed = 4;
  const McResult r = run_experiment(plan);
  double lo = 2.0;
  double hi = 0.0;
  for (std::size_t e = 0; e < r.estimators.size(); ++e) {
    const double m = r.cell(e, 0).mean_mse;
    EXPECT_GE(m, 0.0);
    EXPECT_LE(m, 2.0);
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  EXPECT_GT(lo, 1.0);
  EXPECT_LT(hi - lo, 0.15);
}

TEST(RunExperiment, ResultInvariants) {
  const McResult r = run_experiment(table1_plan({20, 50}, 50, 5));
  ASSERT_EQ(r.cells.size(), 10u);
  EXPECT_EQ(r.replications, 50u);
  EXPECT_EQ(r.point_seeds.size(), 2u);
  for (std::size_t e = 0; e < r.cells.size(); ++e) {
    for (const auto& c : r.cells[e]) {
      EXPECT_GE(c.mean_mse, 0.0);
      EXPECT_LE(c.mean_mse, 2.0);
      EXPECT_GE(c.se_mse, 0.0);
      EXPECT_EQ(c.mean_weight.has_value(), r.estimators[e].reports_weight());
      if (c.mean_weight) {
        EXPECT_GE(*c.mean_weight, 0.0);
        EXPECT_LE(*c.mean_weight, 1.0);
      }
    }
  }
}

TEST(RunExperiment, ValidationHappensBeforeAnyReplication) {
  ExperimentPlan plan = table1_plan({20}, 10, 1);
  bool called = false;
  plan.observer = [&](auto...) { called = true; };
  plan.points.front().spec.n = 7;
  EXPECT_THROW(run_experiment(plan), DegreesOfFreedomError);
  EXPECT_FALSE(called);

  plan = table1_plan({20}, 10, 1);
  plan.replications = 0;
  EXPECT_THROW(run_experiment(plan), ValidationError);
  plan = table1_plan({20}, 10, 1);
  plan.estimators.push_back(EstimatorSpec::fixed_weight(1.5));
  EXPECT_THROW(run_experiment(plan), DomainError);
  plan.estimators.clear();
  EXPECT_THROW(run_experiment(plan), ValidationError);
}

TEST(RunExperiment, CostGuardFailsFast) {
  ExperimentPlan plan = regime_plan(RegimeSpec::large_p_large_n(0.8, 0.8, 0.4, {500}), default_estimators(), 1000, 1);
  plan.cost_limit = 1e9;
  try {
    (void)run_experiment(plan);
    FAIL() << "expected the cost guard to trip";
  } catch (const CostLimitError& e) {
    EXPECT_GT(e.estimated_cost(), 1e9);
    EXPECT_DOUBLE_EQ(e.estimated_cost(), estimate_cost(plan));
  }
}

TEST(Trend, Classification) {
  EXPECT_EQ(classify_trend({0.1, 0.05, 0.01}), TrendVerdict::decreasing_to_zero);
  EXPECT_EQ(classify_trend({0.1, 0.05, 0.03}), TrendVerdict::inconclusive);
  EXPECT_EQ(classify_trend({0.1, 0.11, 0.01}), TrendVerdict::inconclusive);
  EXPECT_EQ(classify_trend({1.4, 1.45, 1.49}), TrendVerdict::non_vanishing);
  EXPECT_EQ(to_string(TrendVerdict::decreasing_to_zero), "decreasing-to-zero");
  EXPECT_EQ(to_string(TrendVerdict::non_vanishing), "non-vanishing");
}

TEST(Sweep, WeakIdentifiabilitySeparatesResidualFromRegression) {
  const auto sweep = consistency_sweep(RegimeSpec::weak_identifiability(1.0, {20, 100, 500}),
                                       {EstimatorSpec::fixed_weight(1.0), EstimatorSpec::fixed_weight(0.0)}, 300, 11);
  EXPECT_EQ(sweep.verdicts.at(0), TrendVerdict::non_vanishing);
  EXPECT_EQ(sweep.verdicts.at(1), TrendVerdict::decreasing_to_zero);
  EXPECT_GT(sweep.result.cell(0, 2).mean_mse, 1.0);
}

TEST(Sweep, MildWeakIdentifiabilityStillConsistent) {
  const auto sweep = consistency_sweep(RegimeSpec::weak_identifiability(1.0 / 3.0, {20, 100, 500}),
                                       {EstimatorSpec::fixed_weight(0.2)}, 300, 12);
  EXPECT_EQ(sweep.verdicts.at(0), TrendVerdict::decreasing_to_zero);
}

TEST(Sweep, StrongSpikeRegressionErrorDoesNotVanish) {
  const auto sweep = consistency_sweep(RegimeSpec::large_p_large_n(0.8, 0.8, 0.4, {50, 100, 200}),
                                       {EstimatorSpec::fixed_weight(0.0)}, 300, 13);
  const auto& cells = sweep.result.cells.at(0);
  const double se = std::hypot(cells[0].se_mse, cells[2].se_mse);
  EXPECT_GE(cells[2].mean_mse, cells[0].mean_mse - 2.0 * se);
  for (const auto& c : cells) {
    EXPECT_GT(c.mean_mse, 0.2);
    EXPECT_LT(c.mean_mse, 0.45);
  }
  EXPECT_NE(sweep.verdicts.at(0), TrendVerdict::decreasing_to_zero);
}

TEST(Sweep, RejectsShortOrUnorderedGrids) {
  EXPECT_THROW(consistency_sweep(RegimeSpec::traditional({20, 50}), default_estimators(), 10, 1), ValidationError);
  EXPECT_THROW(consistency_sweep(RegimeSpec::traditional({20, 50, 40}), default_estimators(), 10, 1), ValidationError);
}

TEST(RegimePlan, LabelsAndSeeds) {
  const ExperimentPlan plan = regime_plan(RegimeSpec::large_p_large_n(0.8, 0.25, 0.0, {20, 50}), default_estimators(), 5, 3);
  EXPECT_EQ(plan.points.at(0).label, "p=20 (n=10)");
  EXPECT_EQ(plan.points.at(1).label, "p=50 (n=22)");
  EXPECT_EQ(plan.points.at(1).spec.gamma_basis,
            scenario_table3(50, SpikeCase::weak_spike, derive_seed(3, StreamTag::scenario, 1)).gamma_basis);
}

}  // namespace
}  // namespace mareg
