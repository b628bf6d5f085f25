#include "qrdro/mad_dro.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

#include "qrdro/errors.hpp"

namespace qrdro {

namespace {

constexpr double kTieTol = 1e-12;

void require_same_support(const ModelParams& params, const MadAmbiguity& amb) {
  if (params.support_lo() != amb.support_lo() || params.support_hi() != amb.support_hi())
    throw std::invalid_argument(fmt::format(
        "model support [{}, {}] differs from ambiguity support [{}, {}]", params.support_lo(),
        params.support_hi(), amb.support_lo(), amb.support_hi()));
}

struct DemandPoints {
  double lo, mu, hi;
};

DemandPoints demand_points(const ModelParams& params, const MadAmbiguity& amb) {
  const double omp = params.one_minus_p();
  return {omp * amb.support_lo(), omp * amb.mean(), omp * amb.support_hi()};
}

// True when (a, va) should replace the incumbent (b, vb).
bool better(const Policy& a, double va, const Policy& b, double vb) {
  if (va > vb + kTieTol) return true;
  if (va < vb - kTieTol) return false;
  return a.x < b.x || (a.x == b.x && a.q < b.q);
}

// a >= b, counting values equal up to rounding as equal so boundary cases
// follow the stated inequality direction.
bool at_least(double a, double b) {
  return a >= b - 1e-12 * std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace

MadAmbiguity MadAmbiguity::make(const MomentSummary& moments, double lo, double hi) {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi))
    throw std::invalid_argument(fmt::format("MAD ambiguity needs lo < hi, got [{}, {}]", lo, hi));
  if (!(moments.mean > lo && moments.mean < hi))
    throw std::invalid_argument(fmt::format(
        "MAD ambiguity needs lo < mean < hi, got mean {} on [{}, {}]", moments.mean, lo, hi));
  if (!(moments.mad >= 0.0 && std::isfinite(moments.mad)))
    throw std::invalid_argument(fmt::format("MAD must be >= 0, got {}", moments.mad));
  const double bound = 2.0 * (moments.mean - lo) * (hi - moments.mean) / (hi - lo);
  MomentSummary m = moments;
  bool clamped = false;
  if (m.mad > bound) {
    m.mad = bound;
    clamped = true;
  }
  return MadAmbiguity(m, lo, hi, clamped, moments.mad);
}

ThreePointDistribution extremal_three_point(const MadAmbiguity& amb) {
  const double mu = amb.mean();
  const double sigma = amb.mad();
  const double w_lo = sigma / (2.0 * (mu - amb.support_lo()));
  const double w_hi = sigma / (2.0 * (amb.support_hi() - mu));
  const double w_mu = std::max(0.0, 1.0 - w_lo - w_hi);
  return {{amb.support_lo(), mu, amb.support_hi()}, {w_lo, w_mu, w_hi}};
}

double three_point_expectation(const ModelParams& params, const Policy& policy,
                               const ThreePointDistribution& dist) {
  double total = 0.0;
  for (int k = 0; k < 3; ++k) total += dist.weights[k] * profit(params, policy, dist.points[k]);
  return total;
}

MadPolicyResult solve_by_enumeration(const ModelParams& params, const MadAmbiguity& amb) {
  require_same_support(params, amb);
  const auto dist = extremal_three_point(amb);
  const auto d = demand_points(params, amb);
  const std::array<double, 3> pts{d.lo, d.mu, d.hi};
  MadPolicyResult best{{}, -std::numeric_limits<double>::infinity(), "enumeration"};
  for (double x : pts) {
    for (double q : pts) {
      if (q > x) continue;
      const Policy cand{x, q};
      const double v = three_point_expectation(params, cand, dist);
      if (better(cand, v, best.policy, best.value) || std::isinf(best.value)) {
        best.policy = cand;
        best.value = v;
      }
    }
  }
  return best;
}

MadPolicyResult solve_closed_form(const ModelParams& params, const MadAmbiguity& amb,
                                  ClosedFormRule rule) {
  require_same_support(params, amb);
  const auto dist = extremal_three_point(amb);
  const auto d = demand_points(params, amb);
  const double w_lo = dist.weights[0];
  const double w_mu = dist.weights[1];
  const double w_hi = dist.weights[2];
  const double p = params.p();
  const double c = params.c();
  const double c_m = params.c_m();
  const double delta = params.delta();
  const double margin = p - c - delta;

  auto result = [&](double x, double q, const char* label) {
    const Policy pol{x, q};
    return MadPolicyResult{pol, three_point_expectation(params, pol, dist), label};
  };

  if (at_least(w_hi * delta, (w_lo + w_mu) * c)) {
    const double top = rule == ClosedFormRule::corrected ? w_hi * p : w_lo * p;
    if (at_least(top, c_m + c)) return result(d.hi, d.hi, "1a");
    if (at_least((w_mu + w_hi) * p, c_m + c)) return result(d.mu, d.mu, "1b");
    return result(d.lo, d.lo, "1c");
  }
  if (at_least((w_mu + w_hi) * delta, w_lo * c)) {
    if (at_least(w_hi * margin, c_m)) return result(d.hi, d.mu, "2a");
    if (at_least((w_mu + w_hi) * p, c_m + c)) return result(d.mu, d.mu, "2b");
    return result(d.lo, d.lo, "2c");
  }
  if (at_least(w_hi * margin, c_m)) return result(d.hi, d.lo, "3a");
  if (at_least((w_mu + w_hi) * margin, c_m)) return result(d.mu, d.lo, "3b");
  return result(d.lo, d.lo, "3c");
}

double wtc_worst_case(const ModelParams& params, double x, double tau, const MadAmbiguity& amb) {
  if (!(tau >= 0.0)) throw std::invalid_argument(fmt::format("tau must be >= 0, got {}", tau));
  const auto dist = extremal_three_point(amb);
  const auto d = demand_points(params, amb);
  const double w_lo = dist.weights[0];
  const double w_mu = dist.weights[1];
  const double w_hi = dist.weights[2];
  return w_lo * (x - (1.0 + tau) * d.lo) + w_mu * std::max(x - (1.0 + tau) * d.mu, -tau * x) -
         w_hi * tau * x;
}

MadPolicyResult solve_wtc_constrained(const ModelParams& params, const MadAmbiguity& amb,
                                      double tau) {
  if (!(tau >= 0.0)) throw std::invalid_argument(fmt::format("tau must be >= 0, got {}", tau));
  require_same_support(params, amb);
  const auto d = demand_points(params, amb);
  const double scale = std::max(1.0, d.hi);
  const double tol = 1e-12 * scale;

  auto g = [&](double x) { return wtc_worst_case(params, x, tau, amb); };
  if (g(d.lo) > tol)
    throw InfeasibleError(
        fmt::format("waste constraint infeasible for tau = {}: smallest worst-case value {} at x = {}",
                    tau, g(d.lo), d.lo),
        g(d.lo));

  MadPolicyResult unconstrained = solve_by_enumeration(params, amb);
  if (g(unconstrained.policy.x) <= tol) return unconstrained;

  // Each region of the program is a polygon bounded by lines of three kinds:
  // x = a, q = b and q = x. The constraint is linear in x on either side of d_mu.
  std::vector<double> verticals{d.lo, d.mu, d.hi};
  const std::vector<double> horizontals{d.lo, d.mu, d.hi};
  const auto dist = extremal_three_point(amb);
  for (const auto& [a, b] : {std::pair{d.lo, d.mu}, std::pair{d.mu, d.hi}}) {
    const double ga = g(a);
    const double gb = g(b);
    if ((ga <= 0.0) == (gb <= 0.0) || gb == ga) continue;
    double root = a + (b - a) * ga / (ga - gb);
    for (int k = 0; k < 64 && g(root) > 0.0; ++k) root = std::nextafter(root, ga <= 0.0 ? a : b);
    verticals.push_back(root);
  }

  struct Point {
    double x, q;
  };
  std::vector<Point> points;
  for (double a : verticals) {
    for (double b : horizontals) points.push_back({a, b});
    points.push_back({a, a});
  }
  for (double b : horizontals) points.push_back({b, b});

  MadPolicyResult best{{}, -std::numeric_limits<double>::infinity(), "wtc"};
  for (const auto& pt : points) {
    if (pt.x < d.lo - tol || pt.x > d.hi + tol) continue;
    if (pt.q < d.lo - tol || pt.q > pt.x + tol) continue;
    const Policy cand{std::clamp(pt.x, d.lo, d.hi), std::clamp(pt.q, d.lo, std::min(pt.x, d.hi))};
    if (g(cand.x) > tol) continue;
    const double v = three_point_expectation(params, cand, dist);
    if (std::isinf(best.value) || better(cand, v, best.policy, best.value)) {
      best.policy = cand;
      best.value = v;
    }
  }
  return best;
}

}  // namespace qrdro
