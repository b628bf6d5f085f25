#pragma once

// Economic primitives of the two-stage quick-response production model.
//
// A firm buys fabric x and commits first-stage production q <= x before the
// market size Y is observed. Demand is d = (1 - p) Y. After observing demand it
// may produce up to x - q more units at unit surcharge delta. The resulting
// profit is concave and piecewise affine in (x, q, y).

#include "qrdro/kernels/kernels.hpp"

namespace qrdro {

class ModelParams {
 public:
  /// Validates eagerly: 0 < p < 1, c >= 0, c_m >= 0, delta >= 0,
  /// 0 <= support_lo < support_hi and p > c + delta + c_m.
  /// Throws std::invalid_argument naming the violated inequality.
  static ModelParams make(double p, double c, double c_m, double delta, double support_lo,
                          double support_hi);

  double p() const { return p_; }
  double c() const { return c_; }
  double c_m() const { return c_m_; }
  double delta() const { return delta_; }
  double support_lo() const { return support_lo_; }
  double support_hi() const { return support_hi_; }

  double one_minus_p() const { return 1.0 - p_; }
  /// Demand-scale policy box [(1-p) y_lo, (1-p) y_hi].
  double box_lo() const { return (1.0 - p_) * support_lo_; }
  double box_hi() const { return (1.0 - p_) * support_hi_; }

  ModelParams with_delta(double delta) const;
  ModelParams with_support(double lo, double hi) const;

 private:
  ModelParams(double p, double c, double c_m, double delta, double lo, double hi)
      : p_(p), c_(c), c_m_(c_m), delta_(delta), support_lo_(lo), support_hi_(hi) {}

  double p_;
  double c_;
  double c_m_;
  double delta_;
  double support_lo_;
  double support_hi_;
};

/// Fabric purchase x and first-stage production q.
struct Policy {
  double x = 0.0;
  double q = 0.0;

  friend bool operator==(const Policy&, const Policy&) = default;
};

/// True when q <= x and both lie in the demand-scale box (with slack `tol`).
bool in_policy_box(const ModelParams& params, const Policy& policy, double tol = 1e-12);

/// d = (1 - p) y. Throws std::domain_error for negative y.
double demand(const ModelParams& params, double y);

/// min{(d - q)^+, x - q}.
double second_stage_quantity(const ModelParams& params, const Policy& policy, double y);

/// Pointwise minimum of the three affine pieces
///   p d - c_m x - c q,  (p - c - delta) d - c_m x + delta q,  (p - c - delta - c_m) x + delta q.
double profit(const ModelParams& params, const Policy& policy, double y);

/// The same profit via the three-case split on where d falls relative to q and x.
double profit_case_split(const ModelParams& params, const Policy& policy, double y);

/// min{d, x}
double fulfilled_demand(const ModelParams& params, double x, double y);

/// (x - d)^+, the unsold goods plus unused fabric.
double total_waste(const ModelParams& params, double x, double y);

/// (q - d)^+
double unsold_goods(const ModelParams& params, const Policy& policy, double y);

/// (x - q - q_delta)^+
double unused_fabric(const ModelParams& params, const Policy& policy, double y);

/// max{x - (1 + tau) d, -tau x}; its expectation is <= 0 exactly when the
/// waste-to-consumption ratio is <= tau.
double wtc_integrand(const ModelParams& params, double x, double tau, double y);

/// Coefficients of the profit pieces in the form the batch kernels consume.
kernels::ProfitCoefficients profit_coefficients(const ModelParams& params, const Policy& policy);

}  // namespace qrdro
