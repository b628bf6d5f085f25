#pragma once

// Batch kernels over sample arrays.
//
// Every kernel exists as a scalar reference and, where the target supports it,
// an AVX2 variant. The active variant is chosen once at runtime from the CPU's
// capabilities; QRDRO_KERNEL_ISA=scalar|avx2 in the environment or force_isa()
// overrides the choice.
//
// Sums use one fixed reduction order so every variant returns identical bits:
// the range is split recursively in halves (split point rounded down to a
// multiple of 4) until a leaf holds at most kLeafSize elements; inside a leaf,
// element i is added to lane accumulator i mod 4 in index order and the leaf
// result is (lane0 + lane1) + (lane2 + lane3); leaf results are added back up
// the recursion tree. Per-element values are computed with the same sequence
// of IEEE operations in every variant (min/max return the second operand on
// ties, matching the x86 min/max instructions).

#include <cstddef>
#include <span>
#include <string_view>

namespace qrdro::kernels {

inline constexpr std::size_t kLeafSize = 64;

/// Profit = min(price d + first_intercept, qr_margin d + second_intercept, capped_profit),
/// d = one_minus_p * y.
struct ProfitCoefficients {
  double one_minus_p;
  double price;
  double qr_margin;
  double first_intercept;
  double second_intercept;
  double capped_profit;
};

struct WasteSums {
  double waste = 0.0;
  double fulfilled = 0.0;
};

/// Per-sample infimum over z in [lo, hi] of min_j (slope_j z + intercept_j) + lambda (z - y)^2
/// with j over two sloped pieces and one flat piece (attained at z = y).
struct DualPieces {
  double slope1;
  double intercept1;
  double slope2;
  double intercept2;
  double flat;
  double lo;
  double hi;
};

/// Per-sample supremum over z in [lo, hi] of
/// max(x - slope z, -tau x) - alpha (z - y)^2.
struct WtcSupTerms {
  double slope;
  double x;
  double neg_tau_x;
  double lo;
  double hi;
};

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);
bool isa_available(Isa isa);
Isa active_isa();
/// Throws std::invalid_argument if the ISA is not available on this machine/build.
void force_isa(Isa isa);

double profit_sum(const ProfitCoefficients& coef, std::span<const double> y);
WasteSums waste_fulfilled_sums(double one_minus_p, double x, std::span<const double> y);
double wtc_integrand_sum(double one_minus_p, double x, double tau, std::span<const double> y);
/// `per_sample` is either empty or the same length as `y`.
double dual_infimum_sum(const DualPieces& pieces, double lambda, std::span<const double> y,
                        std::span<double> per_sample = {});
double wtc_sup_sum(const WtcSupTerms& terms, double alpha, std::span<const double> y,
                   std::span<double> per_sample = {});

/// Fixed-order sum of an arbitrary array (the same reduction tree as above).
double canonical_sum(std::span<const double> v);

// The variants themselves, exposed for equivalence tests.
namespace scalar {
double profit_sum(const ProfitCoefficients& coef, std::span<const double> y);
WasteSums waste_fulfilled_sums(double one_minus_p, double x, std::span<const double> y);
double wtc_integrand_sum(double one_minus_p, double x, double tau, std::span<const double> y);
double dual_infimum_sum(const DualPieces& pieces, double lambda, std::span<const double> y,
                        std::span<double> per_sample);
double wtc_sup_sum(const WtcSupTerms& terms, double alpha, std::span<const double> y,
                   std::span<double> per_sample);
double canonical_sum(std::span<const double> v);
}  // namespace scalar

namespace avx2 {
double profit_sum(const ProfitCoefficients& coef, std::span<const double> y);
WasteSums waste_fulfilled_sums(double one_minus_p, double x, std::span<const double> y);
double wtc_integrand_sum(double one_minus_p, double x, double tau, std::span<const double> y);
double dual_infimum_sum(const DualPieces& pieces, double lambda, std::span<const double> y,
                        std::span<double> per_sample);
double wtc_sup_sum(const WtcSupTerms& terms, double alpha, std::span<const double> y,
                   std::span<double> per_sample);
double canonical_sum(std::span<const double> v);
}  // namespace avx2

}  // namespace qrdro::kernels
