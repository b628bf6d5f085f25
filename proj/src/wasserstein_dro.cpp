#include "qrdro/wasserstein_dro.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "qrdro/errors.hpp"
#include "qrdro/kernels/kernels.hpp"
#include "qrdro/search.hpp"

namespace qrdro {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_support(const ModelParams& params, const WassersteinAmbiguity& amb) {
  if (params.support_lo() != amb.support_lo() || params.support_hi() != amb.support_hi())
    throw std::invalid_argument(fmt::format(
        "model support [{}, {}] differs from ambiguity support [{}, {}]", params.support_lo(),
        params.support_hi(), amb.support_lo(), amb.support_hi()));
}

void require_tau(double tau) {
  if (!(tau >= 0.0 && std::isfinite(tau)))
    throw std::invalid_argument(fmt::format("tau must be finite and >= 0, got {}", tau));
}

kernels::DualPieces dual_pieces(const ModelParams& params, const Policy& policy, double lo,
                                double hi) {
  const auto k = profit_coefficients(params, policy);
  return {.slope1 = k.price * k.one_minus_p,
          .intercept1 = k.first_intercept,
          .slope2 = k.qr_margin * k.one_minus_p,
          .intercept2 = k.second_intercept,
          .flat = k.capped_profit,
          .lo = lo,
          .hi = hi};
}

kernels::WtcSupTerms wtc_terms(const ModelParams& params, double x, double tau, double lo,
                               double hi) {
  return {.slope = (1.0 + tau) * params.one_minus_p(),
          .x = x,
          .neg_tau_x = -(tau * x),
          .lo = lo,
          .hi = hi};
}

double mean_of_sum(double sum, std::size_t n) { return sum / static_cast<double>(n); }

// Objective of the outer search; avoids the per-sample buffers.
double worst_case_value(const ModelParams& params, const Policy& policy,
                        const WassersteinAmbiguity& amb) {
  const auto y = amb.samples().view();
  const double eps2 = amb.radius() * amb.radius();
  if (eps2 == 0.0)
    return mean_of_sum(kernels::profit_sum(profit_coefficients(params, policy), y), y.size());
  const auto pieces = dual_pieces(params, policy, amb.support_lo(), amb.support_hi());
  const auto phi = [&](double lambda) {
    return -eps2 * lambda + mean_of_sum(kernels::dual_infimum_sum(pieces, lambda, y), y.size());
  };
  return search::maximize_on_halfline(phi).value;
}

double wtc_sup_value(const ModelParams& params, double x, double tau,
                     const WassersteinAmbiguity& amb) {
  const auto y = amb.samples().view();
  const double eps2 = amb.radius() * amb.radius();
  if (eps2 == 0.0)
    return mean_of_sum(kernels::wtc_integrand_sum(params.one_minus_p(), x, tau, y), y.size());
  const auto terms = wtc_terms(params, x, tau, amb.support_lo(), amb.support_hi());
  const auto neg_psi = [&](double alpha) {
    return -(eps2 * alpha + mean_of_sum(kernels::wtc_sup_sum(terms, alpha, y), y.size()));
  };
  return -search::maximize_on_halfline(neg_psi).value;
}

WassersteinSolution solve_on(const ModelParams& params, const WassersteinAmbiguity& amb,
                             double x_hi, const SearchOptions& opts) {
  const double lo = params.box_lo();
  const double tol = opts.rel_tol * (params.box_hi() - lo);
  const auto best = search::maximize_on_triangle(
      [&](double x, double q) { return worst_case_value(params, {x, q}, amb); }, lo, x_hi, tol);
  const Policy policy{best.x, best.q};
  const auto eval = worst_case_expected_profit(params, policy, amb);
  return {policy, eval.value, eval.lambda_star};
}

}  // namespace

WassersteinAmbiguity WassersteinAmbiguity::make(SampleSet samples, double radius, double lo,
                                                double hi) {
  if (samples.values.empty())
    throw std::invalid_argument("Wasserstein ambiguity needs at least one sample");
  if (!(radius >= 0.0 && std::isfinite(radius)))
    throw std::invalid_argument(fmt::format("Wasserstein radius must be >= 0, got {}", radius));
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi))
    throw std::invalid_argument(fmt::format("Wasserstein support needs lo < hi, got [{}, {}]", lo, hi));
  for (std::size_t i = 0; i < samples.values.size(); ++i) {
    const double v = samples.values[i];
    if (!(v >= lo && v <= hi))
      throw std::invalid_argument(
          fmt::format("sample {} = {} lies outside the support [{}, {}]", i, v, lo, hi));
  }
  return WassersteinAmbiguity(std::move(samples), radius, lo, hi);
}

WassersteinAmbiguity WassersteinAmbiguity::with_radius(double radius) const {
  return make(samples_, radius, support_lo_, support_hi_);
}

double radius_from_samples(std::size_t n, double C) {
  if (n == 0) throw std::invalid_argument("radius schedule needs n >= 1");
  if (!(C >= 0.0)) throw std::invalid_argument(fmt::format("radius constant must be >= 0, got {}", C));
  return C / std::sqrt(static_cast<double>(n));
}

double inner_infimum(const ModelParams& params, const Policy& policy, double lambda, double y,
                     double support_lo, double support_hi) {
  if (!(lambda >= 0.0)) throw std::invalid_argument(fmt::format("lambda must be >= 0, got {}", lambda));
  const auto pieces = dual_pieces(params, policy, support_lo, support_hi);
  const double ys[1] = {y};
  return kernels::dual_infimum_sum(pieces, lambda, ys);
}

DualEvaluation worst_case_expected_profit(const ModelParams& params, const Policy& policy,
                                          const WassersteinAmbiguity& amb) {
  require_same_support(params, amb);
  const auto y = amb.samples().view();
  DualEvaluation out;
  out.per_sample_infima.resize(y.size());
  const double eps2 = amb.radius() * amb.radius();
  if (eps2 == 0.0) {
    for (std::size_t i = 0; i < y.size(); ++i) out.per_sample_infima[i] = profit(params, policy, y[i]);
    out.lambda_star = kInf;
    out.value = mean_of_sum(kernels::profit_sum(profit_coefficients(params, policy), y), y.size());
    return out;
  }
  const auto pieces = dual_pieces(params, policy, amb.support_lo(), amb.support_hi());
  const auto phi = [&](double lambda) {
    return -eps2 * lambda + mean_of_sum(kernels::dual_infimum_sum(pieces, lambda, y), y.size());
  };
  const auto best = search::maximize_on_halfline(phi);
  out.lambda_star = best.arg;
  const double sum = kernels::dual_infimum_sum(pieces, best.arg, y, out.per_sample_infima);
  out.value = -eps2 * best.arg + mean_of_sum(sum, y.size());
  return out;
}

WassersteinSolution solve(const ModelParams& params, const WassersteinAmbiguity& amb,
                          const SearchOptions& opts) {
  require_same_support(params, amb);
  return solve_on(params, amb, params.box_hi(), opts);
}

WtcSupEvaluation wtc_sup(const ModelParams& params, double x, double tau,
                         const WassersteinAmbiguity& amb) {
  require_tau(tau);
  require_same_support(params, amb);
  const auto y = amb.samples().view();
  WtcSupEvaluation out;
  out.per_sample_sups.resize(y.size());
  const double eps2 = amb.radius() * amb.radius();
  if (eps2 == 0.0) {
    for (std::size_t i = 0; i < y.size(); ++i)
      out.per_sample_sups[i] = wtc_integrand(params, x, tau, y[i]);
    out.alpha_star = kInf;
    out.value = mean_of_sum(kernels::wtc_integrand_sum(params.one_minus_p(), x, tau, y), y.size());
    return out;
  }
  const auto terms = wtc_terms(params, x, tau, amb.support_lo(), amb.support_hi());
  const auto neg_psi = [&](double alpha) {
    return -(eps2 * alpha + mean_of_sum(kernels::wtc_sup_sum(terms, alpha, y), y.size()));
  };
  const auto best = search::maximize_on_halfline(neg_psi);
  out.alpha_star = best.arg;
  const double sum = kernels::wtc_sup_sum(terms, best.arg, y, out.per_sample_sups);
  out.value = eps2 * best.arg + mean_of_sum(sum, y.size());
  return out;
}

WassersteinSolution solve_wtc_constrained(const ModelParams& params,
                                          const WassersteinAmbiguity& amb, double tau,
                                          const SearchOptions& opts) {
  require_tau(tau);
  require_same_support(params, amb);
  const auto g = [&](double x) { return wtc_sup_value(params, x, tau, amb); };
  const double lo = params.box_lo();
  const double hi = params.box_hi();

  if (g(lo) > 0.0) {
    const double width = hi - lo;
    const auto least = search::golden_maximize([&](double x) { return -g(x); }, lo, hi,
                                               opts.rel_tol * width);
    throw InfeasibleError(
        fmt::format("waste constraint infeasible for tau = {}: smallest worst-case value {} at x = {}",
                    tau, -least.value, least.arg),
        -least.value);
  }

  const auto unconstrained = solve_on(params, amb, hi, opts);
  if (g(unconstrained.policy.x) <= 0.0) return unconstrained;

  // g(lo) <= 0 < g(x*): bisect for the right end of the feasible interval.
  double feasible = lo;
  double infeasible = unconstrained.policy.x;
  const double stop = 1e-13 * std::max(1.0, hi - lo);
  while (infeasible - feasible > stop) {
    const double mid = 0.5 * (feasible + infeasible);
    if (mid <= feasible || mid >= infeasible) break;
    (g(mid) <= 0.0 ? feasible : infeasible) = mid;
  }
  return solve_on(params, amb, feasible, opts);
}

}  // namespace qrdro
