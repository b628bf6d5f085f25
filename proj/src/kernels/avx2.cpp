#include <immintrin.h>

#include <array>

#include "elementwise.hpp"

namespace qrdro::kernels::avx2 {

using detail::lane_total;
using detail::reduce_tree;

namespace {

inline __m256d clamp4(__m256d v, __m256d lo, __m256d hi) {
  return _mm256_max_pd(lo, _mm256_min_pd(hi, v));
}

// Vector body over whole quads, scalar tail into the matching lanes.
template <class F4, class F1>
double lane_sum(std::size_t begin, std::size_t n, const F4& f4, const F1& f1) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, f4(begin + i));
  std::array<double, 4> lanes;
  _mm256_storeu_pd(lanes.data(), acc);
  for (; i < n; ++i) lanes[i & 3] += f1(begin + i);
  return lane_total(lanes);
}

}  // namespace

double profit_sum(const ProfitCoefficients& k, std::span<const double> y) {
  const __m256d omp = _mm256_set1_pd(k.one_minus_p);
  const __m256d price = _mm256_set1_pd(k.price);
  const __m256d margin = _mm256_set1_pd(k.qr_margin);
  const __m256d b1 = _mm256_set1_pd(k.first_intercept);
  const __m256d b2 = _mm256_set1_pd(k.second_intercept);
  const __m256d b3 = _mm256_set1_pd(k.capped_profit);
  const double* py = y.data();
  auto f4 = [&](std::size_t i) {
    const __m256d d = _mm256_mul_pd(omp, _mm256_loadu_pd(py + i));
    const __m256d first = _mm256_add_pd(_mm256_mul_pd(price, d), b1);
    const __m256d second = _mm256_add_pd(_mm256_mul_pd(margin, d), b2);
    return _mm256_min_pd(_mm256_min_pd(first, second), b3);
  };
  auto f1 = [&](std::size_t i) { return detail::profit_at(k, py[i]); };
  return reduce_tree<double>(0, y.size(),
                             [&](std::size_t b, std::size_t n) { return lane_sum(b, n, f4, f1); });
}

WasteSums waste_fulfilled_sums(double one_minus_p, double x, std::span<const double> y) {
  const __m256d omp = _mm256_set1_pd(one_minus_p);
  const __m256d vx = _mm256_set1_pd(x);
  const __m256d zero = _mm256_setzero_pd();
  const double* py = y.data();
  auto waste4 = [&](std::size_t i) {
    const __m256d d = _mm256_mul_pd(omp, _mm256_loadu_pd(py + i));
    return _mm256_max_pd(_mm256_sub_pd(vx, d), zero);
  };
  auto fulfilled4 = [&](std::size_t i) {
    const __m256d d = _mm256_mul_pd(omp, _mm256_loadu_pd(py + i));
    return _mm256_min_pd(d, vx);
  };
  auto waste1 = [&](std::size_t i) { return detail::waste_at(one_minus_p, x, py[i]); };
  auto fulfilled1 = [&](std::size_t i) { return detail::fulfilled_at(one_minus_p, x, py[i]); };
  const auto r = reduce_tree<detail::Pair>(0, y.size(), [&](std::size_t b, std::size_t n) {
    return detail::Pair{lane_sum(b, n, waste4, waste1), lane_sum(b, n, fulfilled4, fulfilled1)};
  });
  return {r.a, r.b};
}

double wtc_integrand_sum(double one_minus_p, double x, double tau, std::span<const double> y) {
  const double one_plus_tau = 1.0 + tau;
  const double neg_tau_x = -(tau * x);
  const __m256d omp = _mm256_set1_pd(one_minus_p);
  const __m256d opt = _mm256_set1_pd(one_plus_tau);
  const __m256d vx = _mm256_set1_pd(x);
  const __m256d ntx = _mm256_set1_pd(neg_tau_x);
  const double* py = y.data();
  auto f4 = [&](std::size_t i) {
    __m256d d = _mm256_mul_pd(omp, _mm256_loadu_pd(py + i));
    d = _mm256_mul_pd(opt, d);
    return _mm256_max_pd(_mm256_sub_pd(vx, d), ntx);
  };
  auto f1 = [&](std::size_t i) {
    return detail::wtc_integrand_at(one_minus_p, x, one_plus_tau, neg_tau_x, py[i]);
  };
  return reduce_tree<double>(0, y.size(),
                             [&](std::size_t b, std::size_t n) { return lane_sum(b, n, f4, f1); });
}

double dual_infimum_sum(const DualPieces& k, double lambda, std::span<const double> y,
                        std::span<double> per_sample) {
  const double shift1 = k.slope1 / (2.0 * lambda);
  const double shift2 = k.slope2 / (2.0 * lambda);
  const bool store = !per_sample.empty();
  const __m256d a1 = _mm256_set1_pd(k.slope1);
  const __m256d c1 = _mm256_set1_pd(k.intercept1);
  const __m256d s1 = _mm256_set1_pd(shift1);
  const __m256d a2 = _mm256_set1_pd(k.slope2);
  const __m256d c2 = _mm256_set1_pd(k.intercept2);
  const __m256d s2 = _mm256_set1_pd(shift2);
  const __m256d flat = _mm256_set1_pd(k.flat);
  const __m256d lam = _mm256_set1_pd(lambda);
  const __m256d lo = _mm256_set1_pd(k.lo);
  const __m256d hi = _mm256_set1_pd(k.hi);
  const double* py = y.data();
  auto piece = [&](__m256d yv, __m256d a, __m256d c, __m256d s) {
    const __m256d z = clamp4(_mm256_sub_pd(yv, s), lo, hi);
    const __m256d t = _mm256_sub_pd(z, yv);
    const __m256d pen = _mm256_mul_pd(_mm256_mul_pd(lam, t), t);
    return _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(a, z), c), pen);
  };
  auto f4 = [&](std::size_t i) {
    const __m256d yv = _mm256_loadu_pd(py + i);
    const __m256d v =
        _mm256_min_pd(_mm256_min_pd(piece(yv, a1, c1, s1), piece(yv, a2, c2, s2)), flat);
    if (store) _mm256_storeu_pd(per_sample.data() + i, v);
    return v;
  };
  auto f1 = [&](std::size_t i) {
    const double v = detail::dual_infimum_at(k, shift1, shift2, lambda, py[i]);
    if (store) per_sample[i] = v;
    return v;
  };
  return reduce_tree<double>(0, y.size(),
                             [&](std::size_t b, std::size_t n) { return lane_sum(b, n, f4, f1); });
}

double wtc_sup_sum(const WtcSupTerms& k, double alpha, std::span<const double> y,
                   std::span<double> per_sample) {
  const double shift = k.slope / (2.0 * alpha);
  const bool store = !per_sample.empty();
  const __m256d slope = _mm256_set1_pd(k.slope);
  const __m256d vx = _mm256_set1_pd(k.x);
  const __m256d ntx = _mm256_set1_pd(k.neg_tau_x);
  const __m256d sh = _mm256_set1_pd(shift);
  const __m256d al = _mm256_set1_pd(alpha);
  const __m256d lo = _mm256_set1_pd(k.lo);
  const __m256d hi = _mm256_set1_pd(k.hi);
  const double* py = y.data();
  auto f4 = [&](std::size_t i) {
    const __m256d yv = _mm256_loadu_pd(py + i);
    const __m256d z = clamp4(_mm256_sub_pd(yv, sh), lo, hi);
    const __m256d t = _mm256_sub_pd(z, yv);
    const __m256d pen = _mm256_mul_pd(_mm256_mul_pd(al, t), t);
    __m256d v = _mm256_sub_pd(vx, _mm256_mul_pd(slope, z));
    v = _mm256_sub_pd(v, pen);
    v = _mm256_max_pd(v, ntx);
    if (store) _mm256_storeu_pd(per_sample.data() + i, v);
    return v;
  };
  auto f1 = [&](std::size_t i) {
    const double v = detail::wtc_sup_at(k, shift, alpha, py[i]);
    if (store) per_sample[i] = v;
    return v;
  };
  return reduce_tree<double>(0, y.size(),
                             [&](std::size_t b, std::size_t n) { return lane_sum(b, n, f4, f1); });
}

double canonical_sum(std::span<const double> v) {
  const double* pv = v.data();
  auto f4 = [&](std::size_t i) { return _mm256_loadu_pd(pv + i); };
  auto f1 = [&](std::size_t i) { return pv[i]; };
  return reduce_tree<double>(0, v.size(),
                             [&](std::size_t b, std::size_t n) { return lane_sum(b, n, f4, f1); });
}

}  // namespace qrdro::kernels::avx2
