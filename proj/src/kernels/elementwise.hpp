#pragma once

// Per-element scalar operations and the shared reduction tree. Both kernel
// variants include this file; the AVX2 variant uses the scalar element
// functions for leaf tails so that tails round identically.

#include <array>
#include <cstddef>

#include "qrdro/kernels/kernels.hpp"

namespace qrdro::kernels::detail {

// Same tie semantics as _mm256_min_pd / _mm256_max_pd.
inline double vmin(double a, double b) { return a < b ? a : b; }
inline double vmax(double a, double b) { return a > b ? a : b; }

inline double clamp_to(double v, double lo, double hi) { return vmax(lo, vmin(hi, v)); }

inline double profit_at(const ProfitCoefficients& k, double y) {
  const double d = k.one_minus_p * y;
  double first = k.price * d;
  first = first + k.first_intercept;
  double second = k.qr_margin * d;
  second = second + k.second_intercept;
  return vmin(vmin(first, second), k.capped_profit);
}

inline double waste_at(double omp, double x, double y) {
  const double d = omp * y;
  return vmax(x - d, 0.0);
}

inline double fulfilled_at(double omp, double x, double y) {
  const double d = omp * y;
  return vmin(d, x);
}

inline double wtc_integrand_at(double omp, double x, double one_plus_tau, double neg_tau_x,
                               double y) {
  double d = omp * y;
  d = one_plus_tau * d;
  return vmax(x - d, neg_tau_x);
}

// a z + b + lambda (z - y)^2 with z = clamp(y - shift, lo, hi), shift = a / (2 lambda).
inline double quad_piece_min(double a, double b, double shift, double lambda, double lo,
                             double hi, double y) {
  const double z = clamp_to(y - shift, lo, hi);
  const double t = z - y;
  double pen = lambda * t;
  pen = pen * t;
  double v = a * z;
  v = v + b;
  return v + pen;
}

inline double dual_infimum_at(const DualPieces& k, double shift1, double shift2, double lambda,
                              double y) {
  const double v1 = quad_piece_min(k.slope1, k.intercept1, shift1, lambda, k.lo, k.hi, y);
  const double v2 = quad_piece_min(k.slope2, k.intercept2, shift2, lambda, k.lo, k.hi, y);
  return vmin(vmin(v1, v2), k.flat);
}

// x - s z - alpha (z - y)^2 with z = clamp(y - shift, lo, hi), shift = s / (2 alpha).
inline double wtc_sup_at(const WtcSupTerms& k, double shift, double alpha, double y) {
  const double z = clamp_to(y - shift, k.lo, k.hi);
  const double t = z - y;
  double pen = alpha * t;
  pen = pen * t;
  double v = k.slope * z;
  v = k.x - v;
  v = v - pen;
  return vmax(v, k.neg_tau_x);
}

inline double lane_total(const std::array<double, 4>& lanes) {
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

// Recursive halving down to leaves of at most kLeafSize elements.
template <class Acc, class Leaf>
Acc reduce_tree(std::size_t begin, std::size_t n, const Leaf& leaf) {
  if (n <= kLeafSize) return leaf(begin, n);
  const std::size_t half = (n / 2) & ~std::size_t{3};
  Acc left = reduce_tree<Acc>(begin, half, leaf);
  Acc right = reduce_tree<Acc>(begin + half, n - half, leaf);
  return left + right;
}

struct Pair {
  double a = 0.0;
  double b = 0.0;
  Pair operator+(const Pair& o) const { return {a + o.a, b + o.b}; }
};

}  // namespace qrdro::kernels::detail
