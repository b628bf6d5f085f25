#include <gtest/gtest.h>

#include <cmath>

#include "qrdro/baselines.hpp"
#include "qrdro/evaluation.hpp"
#include "qrdro/mad_dro.hpp"
#include "support/oracles.hpp"
#include "support/random_instances.hpp"

namespace {

using namespace qrdro;

ModelParams base_params(double delta = 0.1) { return ModelParams::make(0.6, 0.1, 0.15, delta, 0.0, 1.0); }

TrialConfig small_config() {
  TrialConfig c;
  c.n_eval = 2000;
  c.n_trials = 6;
  return c;
}

TEST(McProfit, ConstantSamplesGiveExactProfit) {
  const std::vector<double> y(17, 0.625);
  EXPECT_NEAR(mc_expected_profit(base_params(), {0.3, 0.2}, y), 0.075, 1e-15);
  EXPECT_THROW(mc_expected_profit(base_params(), {0.3, 0.2}, std::vector<double>{}), std::invalid_argument);
}

TEST(McProfit, UniformMatchesClosedForm) {
  const auto y = sample(Uniform{0, 1}, 1'000'000, 17).values;
  double s2 = 0;
  const double mean = mc_expected_profit(base_params(), {0.3, 0.2}, y);
  for (double v : y) s2 += std::pow(profit(base_params(), {0.3, 0.2}, v) - mean, 2);
  const double se = std::sqrt(s2 / static_cast<double>(y.size())) / 1000.0;
  EXPECT_NEAR(mean, uniform_expected_profit(base_params(), {0.3, 0.2}), 3 * se);
}

TEST(McWtc, Examples) {
  EXPECT_EQ(mc_wtc_ratio(base_params(), {0.2, 0.2}, std::vector<double>{0.5, 0.9, 1.0}), 0.0);
  EXPECT_THROW(mc_wtc_ratio(base_params(), {0.2, 0.2}, std::vector<double>{0.0, 0.0}), std::domain_error);
  EXPECT_NEAR(mc_wtc_ratio(base_params(), {0.3, 0.3}, std::vector<double>{0.5, 1.0}), 0.1 / 0.5, 1e-15);
}

TEST(McWtc, ThreePointSetAgreesWithMadWorstCase) {
  // An evaluation set whose empirical law is the extremal three-point distribution.
  const auto amb = MadAmbiguity::make({0.5, 0.25}, 0.0, 1.0);
  std::vector<double> y;
  y.insert(y.end(), 25, 0.0);
  y.insert(y.end(), 50, 0.5);
  y.insert(y.end(), 25, 1.0);
  testing_support::InstanceGenerator gen(51);
  for (int i = 0; i < 2000; ++i) {
    const double x = gen.uniform(1e-3, 0.4), tau = gen.uniform(0.0, 1.5);
    const double g = wtc_worst_case(base_params(), x, tau, amb);
    if (std::abs(g) <= 1e-9) continue;
    EXPECT_EQ(mc_wtc_ratio(base_params(), {x, x}, y) <= tau, g <= 0.0) << x << ' ' << tau;
  }
}

TEST(Trial, DeterministicAndSeedSensitive) {
  const auto c = small_config();
  const auto a = run_trial(c, base_params(), std::nullopt, 3);
  const auto b = run_trial(c, base_params(), std::nullopt, 3);
  ASSERT_EQ(a.outcomes.size(), all_methods().size());
  for (std::size_t k = 0; k < a.outcomes.size(); ++k) {
    EXPECT_EQ(a.outcomes[k].policy, b.outcomes[k].policy);
    EXPECT_EQ(a.outcomes[k].profit, b.outcomes[k].profit);
    EXPECT_TRUE(a.outcomes[k].ok) << a.outcomes[k].failure;
  }
  const auto other = run_trial(c, base_params(), std::nullopt, 4);
  EXPECT_NE(a.outcomes[0].profit, other.outcomes[0].profit);
}

TEST(Trial, ZeroRadiusWassersteinReproducesSaaProfit) {
  auto c = small_config();
  c.methods = {Method::saa, Method::wasserstein};
  c.wasserstein_C = 0.0;
  const auto t = run_trial(c, base_params(), std::nullopt, 0);
  EXPECT_NEAR(t.outcomes[0].in_model_value, t.outcomes[1].in_model_value, 1e-6);
  EXPECT_NEAR(t.outcomes[0].profit, t.outcomes[1].profit, 1e-4);
}

TEST(Trial, BenchmarkNearUniformOptimumForLargeEvaluation) {
  auto c = small_config();
  c.methods = {Method::benchmark};
  c.n_eval = 400000;
  const auto t = run_trial(c, base_params(), std::nullopt, 0);
  EXPECT_NEAR(t.outcomes[0].profit, uniform_expected_profit(base_params(), {0.25, 0.2}), 5e-4);
}

TEST(Trial, ConstrainedMethodsRespectInModelTarget) {
  auto c = small_config();
  c.methods = {Method::mad, Method::wasserstein, Method::saa};
  for (std::size_t i = 0; i < 4; ++i) {
    const auto t = run_trial(c, base_params(), 0.3, i);
    for (const auto& o : t.outcomes) EXPECT_TRUE(o.ok) << o.failure;
  }
}

TEST(Experiment, SingleTrialReducesToRunTrial) {
  auto c = small_config();
  c.n_trials = 1;
  const auto rep = run_experiment(c, base_params());
  const auto t = run_trial(c, base_params(), std::nullopt, 0);
  for (std::size_t k = 0; k < c.methods.size(); ++k) {
    const auto* row = rep.find(c.methods[k], 0.1);
    ASSERT_NE(row, nullptr);
    EXPECT_EQ(row->outcome.mean_profit, t.outcomes[k].profit);
    EXPECT_EQ(row->outcome.mean_x, t.outcomes[k].policy.x);
    EXPECT_EQ(row->outcome.n_trials, 1u);
  }
}

TEST(Experiment, IndependentOfWorkerCount) {
  auto c = small_config();
  c.delta_grid = {0.0, 0.1, 0.2};
  c.tau_grid = {0.3};
  const auto one = run_experiment(c, base_params());
  c.jobs = 4;
  const auto four = run_experiment(c, base_params());
  ASSERT_EQ(one.rows.size(), four.rows.size());
  for (std::size_t i = 0; i < one.rows.size(); ++i) {
    EXPECT_EQ(one.rows[i].outcome.mean_profit, four.rows[i].outcome.mean_profit);
    EXPECT_EQ(one.rows[i].outcome.wtc_ratio, four.rows[i].outcome.wtc_ratio);
    EXPECT_EQ(one.rows[i].outcome.std_profit, four.rows[i].outcome.std_profit);
  }
}

TEST(Experiment, InvalidGridPointsAreReportedNotThrown) {
  auto c = small_config();
  c.delta_grid = {0.1, 0.4};
  const auto rep = run_experiment(c, base_params());
  const auto* bad = rep.find(Method::saa, 0.4);
  ASSERT_NE(bad, nullptr);
  EXPECT_FALSE(bad->error.empty());
  EXPECT_TRUE(std::isnan(bad->outcome.mean_profit));
  EXPECT_TRUE(rep.find(Method::saa, 0.1)->error.empty());
}

TEST(Experiment, AggregatesMatchPerTrialOutcomes) {
  auto c = small_config();
  c.methods = {Method::wasserstein};
  c.true_dist = Lognormal{-0.84, 0.54};
  const auto rep = run_experiment(c, base_params());
  double profit = 0, ratio = 0, waste = 0, fulfilled = 0;
  for (std::size_t t = 0; t < c.n_trials; ++t) {
    const auto o = run_trial(c, base_params(), std::nullopt, t).outcomes[0];
    profit += o.profit;
    ratio += o.wtc_ratio;
    waste += o.waste_sum;
    fulfilled += o.fulfilled_sum;
  }
  const auto& out = rep.rows.at(0).outcome;
  EXPECT_NEAR(out.mean_profit, profit / 6, 1e-15);
  EXPECT_NEAR(out.wtc_ratio, ratio / 6, 1e-15);
  EXPECT_NEAR(out.pooled_wtc_ratio, waste / fulfilled, 1e-15);
}

TEST(Experiment, ValidationErrors) {
  auto c = small_config();
  c.n_trials = 0;
  EXPECT_THROW(run_experiment(c, base_params()), std::invalid_argument);
  c = small_config();
  c.delta_grid.clear();
  EXPECT_THROW(run_experiment(c, base_params()), std::invalid_argument);
  c = small_config();
  c.tau_grid = {-0.1};
  EXPECT_THROW(run_experiment(c, base_params()), std::invalid_argument);
}

TEST(Methods, NamesRoundTrip) {
  for (Method m : all_methods()) EXPECT_EQ(parse_method(method_name(m)), m);
  EXPECT_FALSE(parse_method("cvar").has_value());
}

}  // namespace
