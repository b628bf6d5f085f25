#pragma once

// Robust policies under a type-2 Wasserstein ball of radius epsilon around the
// empirical distribution of N market-size samples, restricted to [y_lo, y_hi].
//
// The worst-case expected profit is evaluated through its Lagrangian dual
//   max_{lambda >= 0}  -eps^2 lambda + (1/N) sum_i inf_z [Pi(x, q, z) + lambda (z - y_i)^2],
// where each inner infimum splits over the three affine profit pieces and has
// a closed form. The dual is concave in lambda; the outer problem is jointly
// concave in (x, q). Both are solved by derivative-free golden-section search.

#include <cstddef>
#include <vector>

#include "qrdro/core_model.hpp"
#include "qrdro/distributions.hpp"

namespace qrdro {

class WassersteinAmbiguity {
 public:
  /// Throws std::invalid_argument if the sample set is empty, radius < 0,
  /// lo >= hi or any sample lies outside [lo, hi].
  static WassersteinAmbiguity make(SampleSet samples, double radius, double support_lo,
                                   double support_hi);

  const SampleSet& samples() const { return samples_; }
  double radius() const { return radius_; }
  double support_lo() const { return support_lo_; }
  double support_hi() const { return support_hi_; }

  WassersteinAmbiguity with_radius(double radius) const;

 private:
  WassersteinAmbiguity(SampleSet s, double r, double lo, double hi)
      : samples_(std::move(s)), radius_(r), support_lo_(lo), support_hi_(hi) {}

  SampleSet samples_;
  double radius_;
  double support_lo_;
  double support_hi_;
};

/// epsilon = C / sqrt(n).
double radius_from_samples(std::size_t n, double C = 0.1);

/// inf over z in [lo, hi] of profit(z) + lambda (z - y)^2. Throws for lambda < 0.
double inner_infimum(const ModelParams& params, const Policy& policy, double lambda, double y,
                     double support_lo, double support_hi);

struct DualEvaluation {
  /// +inf when the radius is zero (the dual supremum is approached as lambda grows).
  double lambda_star = 0.0;
  double value = 0.0;
  std::vector<double> per_sample_infima;
};

/// Worst-case expected profit of a fixed policy. With radius 0 this is the
/// empirical mean profit and per_sample_infima are the sample profits.
DualEvaluation worst_case_expected_profit(const ModelParams& params, const Policy& policy,
                                          const WassersteinAmbiguity& amb);

struct SearchOptions {
  /// Golden-section tolerance on x and q as a fraction of the box width.
  double rel_tol = 1e-7;
};

struct WassersteinSolution {
  Policy policy;
  double value = 0.0;
  double lambda_star = 0.0;
};

/// Maximizes the worst-case expected profit over {box_lo <= q <= x <= box_hi}.
/// The params' support must equal the ambiguity's support.
WassersteinSolution solve(const ModelParams& params, const WassersteinAmbiguity& amb,
                          const SearchOptions& opts = {});

struct WtcSupEvaluation {
  /// +inf when the radius is zero.
  double alpha_star = 0.0;
  double value = 0.0;
  std::vector<double> per_sample_sups;
};

/// Worst-case expectation of max{x - (1 + tau) d, -tau x} over the ball, as
///   min_{alpha >= 0}  eps^2 alpha + (1/N) sum_i sup_z [max{x - (1 + tau)(1 - p) z, -tau x} - alpha (z - y_i)^2].
/// Nonpositive exactly when the worst-case waste-to-consumption ratio is <= tau.
WtcSupEvaluation wtc_sup(const ModelParams& params, double x, double tau,
                         const WassersteinAmbiguity& amb);

/// Robust policy subject to wtc_sup(x) <= 0. The constraint is convex in x and
/// does not involve q, so its feasible set is an interval [box_lo, x_hi]; x_hi
/// is found by bisection. Throws InfeasibleError when even box_lo violates it.
WassersteinSolution solve_wtc_constrained(const ModelParams& params,
                                          const WassersteinAmbiguity& amb, double tau,
                                          const SearchOptions& opts = {});

}  // namespace qrdro
