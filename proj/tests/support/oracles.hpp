#pragma once
// Independent reference computations for the test suites. Nothing here calls
// the library's solvers or kernels; profits are recomputed from the two-stage
// decision itself.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "qrdro/core_model.hpp"

namespace oracle {

struct Econ {
  double p, c, c_m, delta;
};

inline Econ econ(const qrdro::ModelParams& m) { return {m.p(), m.c(), m.c_m(), m.delta()}; }

/// Revenue on units sold minus fabric, first-stage and second-stage costs,
/// with the second stage topping up to demand within the remaining fabric.
inline double profit(const Econ& e, double x, double q, double y) {
  const double d = (1.0 - e.p) * y;
  const double top_up = std::min(std::max(d - q, 0.0), x - q);
  return e.p * std::min(d, q + top_up) - e.c_m * x - e.c * q - (e.c + e.delta) * top_up;
}

inline double waste(const Econ& e, double x, double y) {
  return std::max(x - (1.0 - e.p) * y, 0.0);
}

inline double fulfilled(const Econ& e, double x, double y) {
  return std::min((1.0 - e.p) * y, x);
}

/// Mean-MAD extremal weights on (lo, mu, hi).
inline std::array<double, 3> three_point_weights(double lo, double mu, double hi, double mad) {
  const double w_lo = mad / (2.0 * (mu - lo));
  const double w_hi = mad / (2.0 * (hi - mu));
  return {w_lo, 1.0 - w_lo - w_hi, w_hi};
}

/// Discrete distribution: points and probabilities.
struct Discrete {
  std::vector<double> y;
  std::vector<double> w;
};

inline double expected_profit(const Econ& e, double x, double q, const Discrete& dist) {
  double s = 0.0;
  for (std::size_t i = 0; i < dist.y.size(); ++i) s += dist.w[i] * profit(e, x, q, dist.y[i]);
  return s;
}

/// E[waste] / E[fulfilled]; +inf when nothing is fulfilled.
inline double wtc_ratio(const Econ& e, double x, const Discrete& dist) {
  double w = 0.0, f = 0.0;
  for (std::size_t i = 0; i < dist.y.size(); ++i) {
    w += dist.w[i] * waste(e, x, dist.y[i]);
    f += dist.w[i] * fulfilled(e, x, dist.y[i]);
  }
  return f > 0.0 ? w / f : std::numeric_limits<double>::infinity();
}

inline std::vector<double> grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k)
    g[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  return g;
}

// Worst case of E[h(Z)] over distributions on a z-grid within squared
// Wasserstein distance eps^2 of the empirical distribution. The transport LP
// has a single budget row, so its value equals the one-dimensional dual
//   max_{l >= 0} -l eps^2 + mean_i min_k [h(z_k) + l (z_k - y_i)^2]
// which is concave and piecewise linear in l. The maximum is located by
// bisection on the sign of a subgradient.
template <class H>
double discretized_worst_case(const H& h, std::span<const double> samples, double eps, double lo,
                              double hi, std::size_t n_grid = 2001) {
  const auto z = grid(lo, hi, n_grid);
  std::vector<double> hz(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) hz[k] = h(z[k]);
  const double n = static_cast<double>(samples.size());
  struct Eval {
    double value, slope;
  };
  auto dual = [&](double l) {
    double v = 0.0, moved = 0.0;
    for (double y : samples) {
      double best = std::numeric_limits<double>::infinity();
      double cost = 0.0;
      for (std::size_t k = 0; k < z.size(); ++k) {
        const double t = (z[k] - y) * (z[k] - y);
        const double val = hz[k] + l * t;
        if (val < best || (val == best && t < cost)) {
          best = val;
          cost = t;
        }
      }
      v += best;
      moved += cost;
    }
    return Eval{-l * eps * eps + v / n, -eps * eps + moved / n};
  };
  if (eps == 0.0) {
    double v = 0.0;
    for (double y : samples) v += h(y);
    return v / n;
  }
  Eval at0 = dual(0.0);
  if (at0.slope <= 0.0) return at0.value;
  double a = 0.0, b = 1.0;
  while (dual(b).slope > 0.0 && b < 1e12) {
    a = b;
    b *= 2.0;
  }
  for (int it = 0; it < 200 && b - a > 1e-12 * (1.0 + b); ++it) {
    const double m = 0.5 * (a + b);
    (dual(m).slope > 0.0 ? a : b) = m;
  }
  return std::max(dual(a).value, dual(b).value);
}

/// Worst case of E[g(Z)] from above: -discretized_worst_case(-g).
template <class G>
double discretized_worst_sup(const G& g, std::span<const double> samples, double eps, double lo,
                             double hi, std::size_t n_grid = 2001) {
  return -discretized_worst_case([&](double z) { return -g(z); }, samples, eps, lo, hi, n_grid);
}

struct GridMax {
  double x = 0.0, q = 0.0, value = -std::numeric_limits<double>::infinity();
};

/// Best value of f over an n x n grid of the triangle lo <= q <= x <= hi,
/// restricted to points where feasible(x) holds.
template <class F, class Feasible>
GridMax grid_maximize(const F& f, const Feasible& feasible, double lo, double hi, std::size_t n) {
  GridMax best;
  const auto g = grid(lo, hi, n);
  for (double x : g) {
    if (!feasible(x)) continue;
    for (double q : g) {
      if (q > x) break;
      const double v = f(x, q);
      if (v > best.value) best = {x, q, v};
    }
  }
  return best;
}

template <class F>
GridMax grid_maximize(const F& f, double lo, double hi, std::size_t n) {
  return grid_maximize(f, [](double) { return true; }, lo, hi, n);
}

}  // namespace oracle
