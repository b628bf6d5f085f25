#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "qrdro/conic_export.hpp"
#include "qrdro/wasserstein_dro.hpp"
#include "support/random_instances.hpp"

namespace {

using namespace qrdro;

ModelParams base_params(double hi = 1.0) { return ModelParams::make(0.6, 0.1, 0.15, 0.1, 0.0, hi); }

WassersteinAmbiguity ball(std::vector<double> y, double eps, double lo = 0.0, double hi = 1.0) {
  return WassersteinAmbiguity::make(SampleSet{std::move(y), 0}, eps, lo, hi);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST(BuildSocp, BlockCounts) {
  const auto one = conic::build_socp(base_params(), ball({0.5}, 0.05));
  EXPECT_EQ(one.soc_blocks.size(), 2u);
  // x >= q, two cone companions and the gamma row.
  EXPECT_EQ(one.linear_rows.size(), 4u);
  EXPECT_EQ(one.variables.size(), 8u);
  for (const auto& b : one.soc_blocks) EXPECT_EQ(b.members.size(), 2u);

  const auto y = sample(Uniform{0, 1}, 10, 5).values;
  const auto ten = conic::build_socp(base_params(), ball(y, 0.03), 0.3);
  EXPECT_EQ(ten.soc_blocks.size(), 30u);
  EXPECT_EQ(ten.linear_rows.size(), 1u + 3u * 10u + 2u * 10u + 1u);
  EXPECT_NO_THROW(ten.index_of("kappa[9]"));
  EXPECT_THROW(ten.index_of("kappa[10]"), std::out_of_range);
}

TEST(BuildSocp, ObjectiveCoefficients) {
  const auto y = sample(Uniform{0, 1}, 4, 6).values;
  const auto prog = conic::build_socp(base_params(), ball(y, 0.2));
  std::vector<double> coef(prog.variables.size(), 0.0);
  for (const auto& [i, c] : prog.objective.terms) coef[i] += c;
  EXPECT_NEAR(coef[prog.index_of("lambda")], -0.04, 1e-17);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(coef[prog.index_of("gamma[" + std::to_string(i) + "]")], 0.25);
  EXPECT_EQ(coef[prog.index_of("x")], 0.0);
}

TEST(BuildSocp, Validation) {
  EXPECT_THROW(conic::build_socp(base_params(), ball({0.5}, 0.05), -0.1), std::invalid_argument);
  EXPECT_THROW(conic::build_socp(base_params(2.0), ball({0.5}, 0.05)), std::invalid_argument);
  EXPECT_THROW(ball({}, 0.05), std::invalid_argument);
}

TEST(BuildSocp, ZeroRadiusIsWellFormed) {
  const auto prog = conic::build_socp(base_params(), ball({0.2, 0.7}, 0.0));
  EXPECT_EQ(conic::parse(conic::serialize(prog)), prog);
  EXPECT_EQ(prog.soc_blocks.size(), 4u);
}

TEST(Serialize, GoldenSingleSample) {
  const auto prog = conic::build_socp(base_params(), ball({0.5}, 0.05));
  EXPECT_EQ(conic::serialize(prog), read_file(std::string(QRDRO_TEST_DATA_DIR) + "/socp_n1.conic"));
}

TEST(Serialize, RoundTripOfBuiltPrograms) {
  testing_support::InstanceGenerator gen(61);
  for (int i = 0; i < 20; ++i) {
    const auto m = gen.params();
    const auto a = ball(gen.samples(1 + i % 7, 0.0, 1.0), gen.uniform(0.0, 0.3));
    const auto prog = conic::build_socp(m, a, i % 2 ? std::optional<double>(gen.uniform(0, 1)) : std::nullopt);
    const auto text = conic::serialize(prog);
    const auto back = conic::parse(text);
    EXPECT_EQ(back, prog);
    EXPECT_EQ(conic::serialize(back), text);
  }
}

TEST(Serialize, RoundTripOfRandomProgram) {
  std::mt19937_64 rng(62);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  std::uniform_int_distribution<std::size_t> pick(0, 9);
  conic::ConicProgram prog;
  for (int i = 0; i < 10; ++i) prog.variables.push_back({"v" + std::to_string(i), -std::abs(u(rng)), std::abs(u(rng))});
  prog.variables[3].upper = std::numeric_limits<double>::infinity();
  prog.variables[4].lower = -std::numeric_limits<double>::infinity();
  prog.variables[5].lower = std::numeric_limits<double>::denorm_min();
  auto random_expr = [&] {
    conic::AffineExpr e{u(rng) / 7.0, {}};
    for (std::size_t k = pick(rng); k > 0; --k) e.terms.emplace_back(pick(rng), u(rng) * 1e-9);
    return e;
  };
  prog.objective = random_expr();
  for (int i = 0; i < 25; ++i) prog.expressions.push_back(random_expr());
  for (std::size_t r = 0; r < 12; ++r) prog.linear_rows.push_back(r * 2);
  prog.soc_blocks.push_back({24, {1, 2, 3, 7}});
  prog.soc_blocks.push_back({0, {}});
  EXPECT_EQ(conic::parse(conic::serialize(prog)), prog);
}

TEST(Parse, ErrorsNameTheLine) {
  const auto good = conic::serialize(conic::build_socp(base_params(), ball({0.5}, 0.05)));
  auto expect_error = [](const std::string& text, const std::string& fragment) {
    try {
      conic::parse(text);
      ADD_FAILURE() << "no error for: " << fragment;
    } catch (const std::runtime_error& e) {
      EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
    }
  };
  std::string bad = good;
  bad.replace(bad.find("var q 0"), 7, "var q zero");
  expect_error(bad, "line 4");
  expect_error(good.substr(0, good.find("socs")), "unexpected end of input");
  bad = good;
  bad.replace(bad.find("conic-program 1"), 15, "conic-program 2");
  expect_error(bad, "line 1");
  bad = good;
  bad.replace(bad.find("soc 1 2 2 3"), 11, "soc 1 2 2 99");
  expect_error(bad, "out of range");
  bad = good;
  bad.replace(bad.find("objective max"), 13, "objective min");
  expect_error(bad, "line 11");
}

TEST(CheckCandidate, AllZerosViolatesRequiredRows) {
  // At zero the first cone reads ||(p (1 - p), 0)|| <= 0.
  const auto m = ModelParams::make(0.6, 0.1, 0.15, 0.1, 0.5, 1.0);
  const auto prog = conic::build_socp(m, ball({0.7, 0.9}, 0.05, 0.5, 1.0));
  const auto rep = conic::check_candidate(prog, std::vector<double>(prog.variables.size(), 0.0));
  EXPECT_NEAR(rep.max_violation, 0.24, 1e-15);
  EXPECT_EQ(rep.worst, "cone 0");
  EXPECT_EQ(rep.objective, 0.0);
  EXPECT_THROW(conic::check_candidate(prog, {0.0}), std::invalid_argument);
}

TEST(CheckCandidate, BoundViolationIsNamed) {
  const auto m = ModelParams::make(0.6, 0.1, 0.15, 0.1, 0.5, 1.0);
  const auto a = ball({0.7, 0.9}, 0.05, 0.5, 1.0);
  auto point = conic::lift_solution(m, a, {0.3, 0.25});
  const auto prog = conic::build_socp(m, a);
  point[prog.index_of("x")] = 0.1;
  point[prog.index_of("q")] = 0.1;
  const auto rep = conic::check_candidate(prog, point);
  EXPECT_GE(rep.max_violation, 0.1 - 1e-15);
  EXPECT_FALSE(rep.worst.empty());
}

TEST(CheckCandidate, ConeViolationIsMeasured) {
  const auto prog = conic::build_socp(base_params(), ball({0.5}, 0.05));
  std::vector<double> a(prog.variables.size(), 0.0);
  a[prog.index_of("gamma[0]")] = -1.0;
  // lambda = 0 leaves ||(0.24, C)|| <= C with C = 1 for the first cone.
  const auto rep = conic::check_candidate(prog, a);
  EXPECT_GT(rep.max_violation, 0.0);
  EXPECT_NE(rep.worst.find("cone"), std::string::npos) << rep.worst;
}

TEST(Lifting, UnconstrainedSolutionsAreFeasibleWithMatchingObjective) {
  testing_support::InstanceGenerator gen(63);
  for (int i = 0; i < 60; ++i) {
    const double lo = i % 3 == 0 ? gen.uniform(0.0, 0.4) : 0.0;
    const double hi = lo + gen.uniform(0.3, 1.5);
    const auto m = gen.params(lo, hi);
    const auto a = ball(gen.samples(1 + i % 12, lo, hi), gen.uniform(1e-3, 0.4), lo, hi);
    const auto prog = conic::build_socp(m, a);
    const auto r = solve(m, a);
    const auto point = conic::lift_solution(m, a, r.policy);
    const auto rep = conic::check_candidate(prog, point);
    EXPECT_LE(rep.max_violation, 1e-6) << rep.worst;
    EXPECT_NEAR(rep.objective, r.value, 1e-6);
    EXPECT_NEAR(rep.objective, worst_case_expected_profit(m, r.policy, a).value, 1e-6);
  }
}

TEST(Lifting, ArbitraryPoliciesAreFeasible) {
  testing_support::InstanceGenerator gen(64);
  for (int i = 0; i < 60; ++i) {
    const auto m = gen.params();
    const auto a = ball(gen.samples(1 + i % 6, 0.0, 1.0), gen.uniform(1e-3, 0.5));
    const auto pol = gen.policy(m);
    const auto rep = conic::check_candidate(conic::build_socp(m, a), conic::lift_solution(m, a, pol));
    EXPECT_LE(rep.max_violation, 1e-6) << rep.worst;
    EXPECT_NEAR(rep.objective, worst_case_expected_profit(m, pol, a).value, 1e-6);
  }
}

TEST(Lifting, ConstrainedSolutionsAreFeasible) {
  testing_support::InstanceGenerator gen(65);
  for (int i = 0; i < 40; ++i) {
    const auto m = gen.params();
    const auto a = ball(gen.samples(2 + i % 9, 0.0, 1.0), gen.uniform(1e-3, 0.3));
    const double tau = gen.uniform(0.0, 0.8);
    const auto r = solve_wtc_constrained(m, a, tau);
    const auto rep = conic::check_candidate(conic::build_socp(m, a, tau), conic::lift_solution(m, a, r.policy, tau));
    EXPECT_LE(rep.max_violation, 1e-6) << rep.worst << " tau " << tau;
    EXPECT_NEAR(rep.objective, r.value, 1e-6);
  }
}

TEST(Lifting, LambdaShiftMovesObjectiveByRadiusSquared) {
  const auto y = sample(Uniform{0, 1}, 10, 66).values;
  const auto a = ball(y, radius_from_samples(10));
  const auto prog = conic::build_socp(base_params(), a);
  auto point = conic::lift_solution(base_params(), a, solve(base_params(), a).policy);
  const double before = conic::evaluate(prog.objective, point);
  point[prog.index_of("lambda")] += 1.0;
  EXPECT_NEAR(before - conic::evaluate(prog.objective, point), a.radius() * a.radius(), 1e-15);
}

TEST(Lifting, RequiresPositiveRadius) {
  EXPECT_THROW(conic::lift_solution(base_params(), ball({0.5}, 0.0), {0.2, 0.2}), std::invalid_argument);
}

}  // namespace
