#pragma once

// Robust policies under the mean-MAD ambiguity set: all distributions on
// [y_lo, y_hi] with mean mu and mean absolute deviation sigma. The worst case
// for the (concave) profit is a three-point distribution on {y_lo, mu, y_hi},
// so the robust problem reduces to a finite one over demand-scale points.

#include <array>
#include <string>

#include "qrdro/core_model.hpp"
#include "qrdro/distributions.hpp"

namespace qrdro {

class MadAmbiguity {
 public:
  /// Requires support_lo < mean < support_hi and mad >= 0. A MAD above the
  /// largest value compatible with the support, 2 (mu - lo)(hi - mu) / (hi - lo),
  /// is clamped down to it and `clamped()` reports true.
  static MadAmbiguity make(const MomentSummary& moments, double support_lo, double support_hi);

  const MomentSummary& moments() const { return moments_; }
  double mean() const { return moments_.mean; }
  double mad() const { return moments_.mad; }
  double support_lo() const { return support_lo_; }
  double support_hi() const { return support_hi_; }
  bool clamped() const { return clamped_; }
  /// The MAD as supplied, before any clamping.
  double requested_mad() const { return requested_mad_; }

 private:
  MadAmbiguity(MomentSummary m, double lo, double hi, bool clamped, double requested)
      : moments_(m), support_lo_(lo), support_hi_(hi), clamped_(clamped), requested_mad_(requested) {}

  MomentSummary moments_;
  double support_lo_;
  double support_hi_;
  bool clamped_;
  double requested_mad_;
};

/// Points (y_lo, mu, y_hi) in market-size scale with probabilities (w_lo, w_mu, w_hi).
struct ThreePointDistribution {
  std::array<double, 3> points{};
  std::array<double, 3> weights{};
};

struct MadPolicyResult {
  Policy policy;
  double value = 0.0;
  /// "1a".."3c" for the threshold rule, "enumeration" for the finite search,
  /// "wtc" when the waste constraint moved the policy.
  std::string case_label;
};

ThreePointDistribution extremal_three_point(const MadAmbiguity& amb);

/// Expected profit of `policy` under a three-point distribution.
double three_point_expectation(const ModelParams& params, const Policy& policy,
                               const ThreePointDistribution& dist);

/// Best of the six ordered pairs x >= q drawn from {d_lo, d_mu, d_hi}. Values within
/// 1e-12 count as ties, resolved to the lexicographically smallest (x, q).
/// The params' support must equal the ambiguity's support.
MadPolicyResult solve_by_enumeration(const ModelParams& params, const MadAmbiguity& amb);

enum class ClosedFormRule {
  /// Chooses (d_hi, d_hi) over (d_mu, d_mu) when c_m + c <= w_hi p, which is
  /// where the former's three-point expectation is at least the latter's.
  corrected,
  /// Uses w_lo p for that threshold instead. Kept for comparison only: it
  /// picks a suboptimal policy when mu is off-centre.
  lower_weight,
};

/// Threshold rule over three regimes of (delta, c) against the weights; the
/// inequality directions at boundaries are fixed (>= selects the earlier case).
MadPolicyResult solve_closed_form(const ModelParams& params, const MadAmbiguity& amb,
                                  ClosedFormRule rule = ClosedFormRule::corrected);

/// Worst-case expectation of the waste integrand max{x - (1 + tau) d, -tau x}:
///   w_lo (x - (1 + tau) d_lo) + w_mu max{x - (1 + tau) d_mu, -tau x} - w_hi tau x.
/// Nonpositive exactly when the worst-case waste-to-consumption ratio is <= tau.
double wtc_worst_case(const ModelParams& params, double x, double tau, const MadAmbiguity& amb);

/// Exact optimum with the waste constraint wtc_worst_case <= 0 (tau >= 0). If the
/// unconstrained optimum satisfies the constraint it is returned unchanged;
/// otherwise every vertex of the piecewise-linear program's regions is
/// enumerated. Throws InfeasibleError if no x in the box satisfies it.
MadPolicyResult solve_wtc_constrained(const ModelParams& params, const MadAmbiguity& amb,
                                      double tau);

}  // namespace qrdro
