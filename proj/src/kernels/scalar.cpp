#include <array>

#include "elementwise.hpp"

namespace qrdro::kernels::scalar {

using detail::lane_total;
using detail::reduce_tree;

namespace {

template <class F>
double lane_sum(std::size_t begin, std::size_t n, const F& f) {
  std::array<double, 4> lanes{0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) lanes[i & 3] += f(begin + i);
  return lane_total(lanes);
}

}  // namespace

double profit_sum(const ProfitCoefficients& coef, std::span<const double> y) {
  return reduce_tree<double>(0, y.size(), [&](std::size_t b, std::size_t n) {
    return lane_sum(b, n, [&](std::size_t i) { return detail::profit_at(coef, y[i]); });
  });
}

WasteSums waste_fulfilled_sums(double one_minus_p, double x, std::span<const double> y) {
  const auto r = reduce_tree<detail::Pair>(0, y.size(), [&](std::size_t b, std::size_t n) {
    return detail::Pair{
        lane_sum(b, n, [&](std::size_t i) { return detail::waste_at(one_minus_p, x, y[i]); }),
        lane_sum(b, n,
                 [&](std::size_t i) { return detail::fulfilled_at(one_minus_p, x, y[i]); })};
  });
  return {r.a, r.b};
}

double wtc_integrand_sum(double one_minus_p, double x, double tau, std::span<const double> y) {
  const double one_plus_tau = 1.0 + tau;
  const double neg_tau_x = -(tau * x);
  return reduce_tree<double>(0, y.size(), [&](std::size_t b, std::size_t n) {
    return lane_sum(b, n, [&](std::size_t i) {
      return detail::wtc_integrand_at(one_minus_p, x, one_plus_tau, neg_tau_x, y[i]);
    });
  });
}

double dual_infimum_sum(const DualPieces& k, double lambda, std::span<const double> y,
                        std::span<double> per_sample) {
  const double shift1 = k.slope1 / (2.0 * lambda);
  const double shift2 = k.slope2 / (2.0 * lambda);
  const bool store = !per_sample.empty();
  return reduce_tree<double>(0, y.size(), [&](std::size_t b, std::size_t n) {
    return lane_sum(b, n, [&](std::size_t i) {
      const double v = detail::dual_infimum_at(k, shift1, shift2, lambda, y[i]);
      if (store) per_sample[i] = v;
      return v;
    });
  });
}

double wtc_sup_sum(const WtcSupTerms& k, double alpha, std::span<const double> y,
                   std::span<double> per_sample) {
  const double shift = k.slope / (2.0 * alpha);
  const bool store = !per_sample.empty();
  return reduce_tree<double>(0, y.size(), [&](std::size_t b, std::size_t n) {
    return lane_sum(b, n, [&](std::size_t i) {
      const double v = detail::wtc_sup_at(k, shift, alpha, y[i]);
      if (store) per_sample[i] = v;
      return v;
    });
  });
}

double canonical_sum(std::span<const double> v) {
  return reduce_tree<double>(0, v.size(), [&](std::size_t b, std::size_t n) {
    return lane_sum(b, n, [&](std::size_t i) { return v[i]; });
  });
}

}  // namespace qrdro::kernels::scalar
