#pragma once

// Derivative-free maximization of concave (more generally unimodal) functions.
//
// All routines evaluate the interval end points as well as the golden-section
// interior points, and return the best point evaluated. Among points whose
// values are within `flat_tol` of the best, the smallest argument wins, so a
// plateau resolves to its left end.

#include <cmath>
#include <limits>

namespace qrdro::search {

struct Maximum {
  double arg = 0.0;
  double value = -std::numeric_limits<double>::infinity();
};

struct Maximum2 {
  double x = 0.0;
  double q = 0.0;
  double value = -std::numeric_limits<double>::infinity();
};

inline constexpr double kInvPhi = 0.6180339887498948482;
inline constexpr double kFlatTol = 1e-13;

/// Golden-section search on [a, b] until the bracket is shorter than `tol`.
template <class F>
Maximum golden_maximize(const F& f, double a, double b, double tol,
                        double flat_tol = kFlatTol) {
  Maximum best;
  auto eval = [&](double t) {
    const double v = f(t);
    // Keep the largest value; on (near) ties keep the smaller argument.
    if (std::isinf(best.value) && best.value < 0) {
      best = {t, v};
    } else if (v > best.value + flat_tol) {
      best = {t, v};
    } else if (v >= best.value - flat_tol && t < best.arg) {
      best = {t, std::max(v, best.value)};
    }
    return v;
  };
  if (!(b > a)) {
    eval(a);
    return best;
  }
  eval(a);
  eval(b);
  double lo = a;
  double hi = b;
  double c = hi - kInvPhi * (hi - lo);
  double d = lo + kInvPhi * (hi - lo);
  double fc = eval(c);
  double fd = eval(d);
  while (hi - lo > tol) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - kInvPhi * (hi - lo);
      fc = eval(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + kInvPhi * (hi - lo);
      fd = eval(d);
    }
  }
  return best;
}

/// Maximizes a concave function on [0, inf): the bracket [0, 1] has its upper
/// end doubled until the function decreases there (or `upper_bound` is hit),
/// then golden-section runs to |d lambda| <= rel_tol (1 + lambda_hi).
template <class F>
Maximum maximize_on_halfline(const F& f, double rel_tol = 1e-9, double upper_bound = 1e9) {
  double prev2 = 0.0;
  double prev = 0.0;
  double f_prev = f(0.0);
  double hi = 1.0;
  while (true) {
    const double f_hi = f(hi);
    if (f_hi <= f_prev || hi >= upper_bound) break;
    prev2 = prev;
    prev = hi;
    f_prev = f_hi;
    hi = std::min(2.0 * hi, upper_bound);
  }
  return golden_maximize(f, prev2, hi, rel_tol * (1.0 + hi));
}

/// Maximizes g(x, q) over the triangle {lo <= q <= x <= hi} by nesting a
/// golden-section search on q inside one on x. Valid for jointly concave g
/// because the partial maximum over q is concave in x.
template <class G>
Maximum2 maximize_on_triangle(const G& g, double lo, double hi, double tol) {
  Maximum2 best;
  auto inner = [&](double x) {
    const Maximum m = golden_maximize([&](double q) { return g(x, q); }, lo, x, tol);
    return m;
  };
  const Maximum outer = golden_maximize([&](double x) { return inner(x).value; }, lo, hi, tol);
  const Maximum at = inner(outer.arg);
  best = {outer.arg, at.arg, at.value};
  return best;
}

}  // namespace qrdro::search
