#pragma once

// Non-robust comparators: sample average approximation (SAA), the uniform
// benchmark policy of the earlier quick-response analysis, and the
// no-quick-response restriction x = q.

#include <optional>
#include <string_view>

#include "qrdro/core_model.hpp"
#include "qrdro/distributions.hpp"

namespace qrdro {

enum class BaselineTag { saa, uniform_benchmark, nqr_saa };

std::string_view baseline_tag_name(BaselineTag tag);

struct BaselineResult {
  Policy policy;
  double value = 0.0;
  BaselineTag tag = BaselineTag::saa;
};

/// Exact maximizer of the empirical mean profit over the demand-scale box.
/// The objective is piecewise affine with kinks only where x or q equals some
/// d_i = (1 - p) y_i, so the optimum is attained on the candidate set
/// {d_i} U {box ends}; ties go to the smallest (x, q). With restrict_equal the
/// search is over x = q.
BaselineResult saa_solve(const ModelParams& params, const SampleSet& samples,
                         bool restrict_equal = false);

/// saa_solve with x = q.
BaselineResult nqr_solve(const ModelParams& params, const SampleSet& samples);

/// Exact expected profit when Y ~ Uniform{lo, hi}, from
/// E Pi = (p - c - delta) M(x) + (c + delta) M(q) - c_m x - c q with M(t) = E min{d, t}.
/// For U[0,1] this is
///   p x(2 - 2p - x) / (2(1 - p)) - c_m x - c q - (c + delta)(x - q)(2 - 2p - x - q) / (2(1 - p)).
double uniform_expected_profit(const ModelParams& params, const Policy& policy,
                               const Uniform& dist = {});

/// A variant of the U[0,1] expected-profit expression
/// with last factor (2 - 2p + q - x). It is not the expected profit
/// (it agrees with uniform_expected_profit only when q = 0 or x = q) and it is
/// convex in q. Kept for comparison only.
double benchmark_objective_variant(const ModelParams& params, const Policy& policy);

enum class BenchmarkFit {
  /// Always assume U[0,1].
  fixed_unit,
  /// Fit Uniform{min, max} to the in-sample data.
  sample_range,
};

/// The benchmark policy: the maximizer of uniform_expected_profit under the
/// assumed uniform, over that uniform's demand range, by nested golden-section.
/// Under U[0,1] with an interior optimum it is
///   x* = (1 - p)(1 - c_m / (p - c - delta)),   q* = (1 - p) delta / (c + delta).
BaselineResult uniform_benchmark_solve(const ModelParams& params,
                                       BenchmarkFit fit = BenchmarkFit::fixed_unit,
                                       const SampleSet* samples = nullptr);

}  // namespace qrdro
