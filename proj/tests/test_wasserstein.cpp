#include <gtest/gtest.h>

#include <cmath>

#include "qrdro/baselines.hpp"
#include "qrdro/errors.hpp"
#include "qrdro/wasserstein_dro.hpp"
#include "support/oracles.hpp"
#include "support/random_instances.hpp"

namespace {

using namespace qrdro;

ModelParams base_params(double lo = 0.0, double hi = 1.0) { return ModelParams::make(0.6, 0.1, 0.15, 0.1, lo, hi); }

WassersteinAmbiguity ball(std::vector<double> y, double eps, double lo = 0.0, double hi = 1.0) {
  return WassersteinAmbiguity::make(SampleSet{std::move(y), 0}, eps, lo, hi);
}

double profit_oracle(const ModelParams& m, const Policy& pol, const WassersteinAmbiguity& a,
                     std::size_t n_grid = 2001) {
  const auto e = oracle::econ(m);
  return oracle::discretized_worst_case([&](double z) { return oracle::profit(e, pol.x, pol.q, z); },
                                        a.samples().view(), a.radius(), a.support_lo(), a.support_hi(),
                                        n_grid);
}

double wtc_oracle(const ModelParams& m, double x, double tau, const WassersteinAmbiguity& a) {
  return oracle::discretized_worst_sup(
      [&](double z) { return std::max(x - (1 + tau) * (1 - m.p()) * z, -tau * x); }, a.samples().view(),
      a.radius(), a.support_lo(), a.support_hi());
}

TEST(Radius, Schedule) {
  EXPECT_NEAR(radius_from_samples(10), 0.0316227766016838, 1e-15);
  EXPECT_EQ(radius_from_samples(1, 0.0), 0.0);
  EXPECT_NEAR(radius_from_samples(100), 0.01, 1e-15);
  EXPECT_THROW(radius_from_samples(0), std::invalid_argument);
}

TEST(Ambiguity, Validation) {
  EXPECT_THROW(ball({}, 0.1), std::invalid_argument);
  EXPECT_THROW(ball({0.5}, -0.1), std::invalid_argument);
  EXPECT_THROW(ball({1.5}, 0.1), std::invalid_argument);
  EXPECT_THROW(ball({0.5}, 0.1, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(solve(base_params(), ball({0.5}, 0.1, 0.0, 2.0)), std::invalid_argument);
}

TEST(InnerInfimum, MatchesGridMinimum) {
  testing_support::InstanceGenerator gen(31);
  const auto z = oracle::grid(0.0, 1.0, 20001);
  for (int i = 0; i < 300; ++i) {
    const auto m = gen.params();
    const auto pol = gen.policy(m);
    const double y = gen.uniform(0.0, 1.0);
    const double lambda = i % 5 == 0 ? 0.0 : std::exp(gen.uniform(-5.0, 5.0));
    double best = 1e300;
    for (double v : z) best = std::min(best, oracle::profit(oracle::econ(m), pol.x, pol.q, v) + lambda * (v - y) * (v - y));
    const double got = inner_infimum(m, pol, lambda, y, 0.0, 1.0);
    EXPECT_LE(got, best + 1e-12);
    EXPECT_GE(got, best - (m.p() * (1 - m.p()) + lambda) * 1e-4);
  }
  EXPECT_THROW(inner_infimum(base_params(), {0.2, 0.2}, -1.0, 0.5, 0.0, 1.0), std::invalid_argument);
}

TEST(WorstCase, ZeroRadiusIsEmpiricalMean) {
  const auto a = ball({0.1, 0.45, 0.8}, 0.0);
  const Policy pol{0.3, 0.2};
  const auto r = worst_case_expected_profit(base_params(), pol, a);
  double mean = 0;
  for (double y : a.samples().values) mean += qrdro::profit(base_params(), pol, y) / 3;
  EXPECT_NEAR(r.value, mean, 1e-15);
  EXPECT_TRUE(std::isinf(r.lambda_star));
  ASSERT_EQ(r.per_sample_infima.size(), 3u);
  EXPECT_NEAR(r.per_sample_infima[1], qrdro::profit(base_params(), pol, 0.45), 1e-15);
}

TEST(WorstCase, SingleSampleExample) {
  const auto a = ball({0.5}, 0.05);
  const Policy pol{0.2, 0.2};
  EXPECT_NEAR(worst_case_expected_profit(base_params(), pol, a).value, profit_oracle(base_params(), pol, a), 1e-3);
}

TEST(WorstCase, MatchesDiscretizedPrimal) {
  testing_support::InstanceGenerator gen(32);
  double worst = 0;
  for (int i = 0; i < 60; ++i) {
    const auto m = gen.params();
    const auto y = gen.samples(1 + i % 5, 0.0, 1.0);
    const auto a = ball(y, gen.uniform(0.0, 0.3));
    const auto pol = gen.policy(m);
    const auto r = worst_case_expected_profit(m, pol, a);
    const double o = profit_oracle(m, pol, a);
    worst = std::max(worst, std::abs(r.value - o));
    EXPECT_NEAR(r.value, o, 1e-3);
    // The grid restricts the adversary, so it can only be less harmful.
    EXPECT_LE(r.value, o + 1e-12);
  }
  RecordProperty("max_abs_gap", std::to_string(worst));
}

TEST(WorstCase, NonIncreasingInRadiusAndConcaveInPolicy) {
  testing_support::InstanceGenerator gen(33);
  for (int i = 0; i < 40; ++i) {
    const auto m = gen.params();
    const auto a = ball(gen.samples(6, 0.0, 1.0), 0.0);
    const auto u = gen.policy(m), v = gen.policy(m);
    double prev = 1e300;
    for (double eps : {0.0, 0.01, 0.05, 0.1, 0.2, 0.5, 1.0}) {
      const double val = worst_case_expected_profit(m, u, a.with_radius(eps)).value;
      EXPECT_LE(val, prev + 1e-12);
      prev = val;
    }
    const auto b = a.with_radius(0.1);
    const Policy mid{0.5 * (u.x + v.x), 0.5 * (u.q + v.q)};
    EXPECT_GE(worst_case_expected_profit(m, mid, b).value + 1e-9,
              0.5 * (worst_case_expected_profit(m, u, b).value + worst_case_expected_profit(m, v, b).value));
  }
}

TEST(Solve, ZeroRadiusMatchesSaa) {
  testing_support::InstanceGenerator gen(34);
  for (int i = 0; i < 40; ++i) {
    const auto m = gen.params();
    SampleSet s{gen.samples(1 + i % 12, 0.0, 1.0), 0};
    const auto w = solve(m, WassersteinAmbiguity::make(s, 0.0, 0.0, 1.0));
    EXPECT_NEAR(w.value, saa_solve(m, s).value, 1e-6);
  }
}

TEST(Solve, LargeRadiusCollapsesToMinimalFabric) {
  const auto m = base_params();
  const auto a = ball({0.3, 0.5, 0.7}, 2.0);
  const auto r = solve(m, a);
  EXPECT_NEAR(r.policy.x, 0.0, 1e-6);
  EXPECT_NEAR(r.policy.q, 0.0, 1e-6);
  const auto grid = oracle::grid_maximize(
      [&](double x, double q) { return worst_case_expected_profit(m, {x, q}, a).value; }, 0.0, 0.4, 201);
  EXPECT_NEAR(r.value, grid.value, 1e-9);
}

TEST(Solve, MatchesGridSearchOfDual) {
  const auto m = base_params();
  const auto y = sample(Uniform{0, 1}, 10, 77).values;
  const auto a = ball(y, radius_from_samples(10));
  const auto r = solve(m, a);
  const auto grid = oracle::grid_maximize(
      [&](double x, double q) { return worst_case_expected_profit(m, {x, q}, a).value; }, 0.0, 0.4, 201);
  EXPECT_GE(r.value, grid.value - 1e-9);
  EXPECT_LE(r.value, grid.value + 1e-4);
  EXPECT_TRUE(in_policy_box(m, r.policy));
  EXPECT_NEAR(r.value, worst_case_expected_profit(m, r.policy, a).value, 1e-15);
}

TEST(WtcSup, ZeroRadiusAndZeroFabric) {
  const auto m = base_params();
  const auto a = ball({0.2, 0.6, 0.9}, 0.0);
  double mean = 0;
  for (double y : a.samples().values) mean += wtc_integrand(m, 0.25, 0.3, y) / 3;
  EXPECT_NEAR(wtc_sup(m, 0.25, 0.3, a).value, mean, 1e-15);
  for (double tau : {0.0, 0.3, 2.0}) EXPECT_NEAR(wtc_sup(m, 0.0, tau, a.with_radius(0.1)).value, 0.0, 1e-15);
}

TEST(WtcSup, SingleSampleExample) {
  const auto a = ball({0.5}, 0.05);
  EXPECT_NEAR(wtc_sup(base_params(), 0.2, 0.3, a).value, wtc_oracle(base_params(), 0.2, 0.3, a), 1e-3);
}

TEST(WtcSup, MatchesDiscretizedPrimal) {
  testing_support::InstanceGenerator gen(35);
  for (int i = 0; i < 60; ++i) {
    const auto m = gen.params();
    const auto a = ball(gen.samples(1 + i % 5, 0.0, 1.0), gen.uniform(0.0, 0.3));
    const double x = gen.uniform(0.0, m.box_hi());
    const double tau = gen.uniform(0.0, 1.0);
    const double got = wtc_sup(m, x, tau, a).value;
    const double o = wtc_oracle(m, x, tau, a);
    EXPECT_NEAR(got, o, 1e-3);
    EXPECT_GE(got, o - 1e-12);
  }
}

TEST(WtcConstrained, SlackTargetEqualsUnconstrained) {
  const auto m = base_params();
  const auto a = ball(sample(Uniform{0, 1}, 10, 3).values, radius_from_samples(10));
  const auto u = solve(m, a);
  const auto c = solve_wtc_constrained(m, a, 50.0);
  EXPECT_EQ(c.policy, u.policy);
  EXPECT_EQ(c.value, u.value);
}

TEST(WtcConstrained, LognormalSamplesRespectTarget) {
  const auto y = sample(Lognormal{-0.84, 0.54}, 10, 4).values;
  const double hi = capped_support_hi(y);
  const auto m = base_params(0.0, hi);
  const auto a = ball(y, radius_from_samples(10), 0.0, hi);
  const auto u = solve(m, a);
  const auto c = solve_wtc_constrained(m, a, 0.3);
  EXPECT_LE(wtc_sup(m, c.policy.x, 0.3, a).value, 1e-9);
  EXPECT_LE(c.value, u.value + 1e-12);
  // Grid check on the feasible region.
  const auto grid = oracle::grid_maximize(
      [&](double x, double q) { return worst_case_expected_profit(m, {x, q}, a).value; },
      [&](double x) { return wtc_sup(m, x, 0.3, a).value <= 0.0; }, m.box_lo(), m.box_hi(), 121);
  EXPECT_GE(c.value, grid.value - 1e-9);
}

TEST(WtcConstrained, ZeroTargetWithMassNearZeroForcesMinimum) {
  const auto a = ball({0.0, 0.02, 0.5}, 0.05);
  const auto r = solve_wtc_constrained(base_params(), a, 0.0);
  EXPECT_NEAR(r.policy.x, 0.0, 1e-9);
  EXPECT_NEAR(r.policy.q, 0.0, 1e-9);
}

TEST(WtcConstrained, BoxMinimumIsAlwaysFeasible) {
  // At x = (1 - p) y_lo every z in the support gives x - (1 + tau) d <= -tau x.
  testing_support::InstanceGenerator gen(36);
  for (int i = 0; i < 200; ++i) {
    const double lo = gen.uniform(0.0, 0.5), hi = lo + gen.uniform(0.1, 1.0);
    const auto m = gen.params(lo, hi);
    const auto a = ball(gen.samples(4, lo, hi), gen.uniform(0.0, 0.5), lo, hi);
    const double tau = gen.uniform(0.0, 1.0);
    EXPECT_LE(wtc_sup(m, m.box_lo(), tau, a).value, 1e-12);
    const auto r = solve_wtc_constrained(m, a, tau);
    EXPECT_LE(wtc_sup(m, r.policy.x, tau, a).value, 1e-9);
  }
}

}  // namespace
