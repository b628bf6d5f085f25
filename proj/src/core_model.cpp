#include "qrdro/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace qrdro {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(fmt::format("invalid model parameters: {}", what));
}

}  // namespace

ModelParams ModelParams::make(double p, double c, double c_m, double delta, double support_lo,
                              double support_hi) {
  require(std::isfinite(p) && std::isfinite(c) && std::isfinite(c_m) && std::isfinite(delta) &&
              std::isfinite(support_lo) && std::isfinite(support_hi),
          "all values must be finite");
  require(p > 0.0 && p < 1.0, "0 < p < 1 violated");
  require(c >= 0.0, "c >= 0 violated");
  require(c_m >= 0.0, "c_m >= 0 violated");
  require(delta >= 0.0, "delta >= 0 violated");
  require(support_lo >= 0.0, "support_lo >= 0 violated");
  require(support_lo < support_hi, "support_lo < support_hi violated");
  if (!(p > c + delta + c_m)) {
    throw std::invalid_argument(fmt::format(
        "invalid model parameters: p > c + delta + c_m violated ({} <= {} + {} + {})", p, c, delta,
        c_m));
  }
  return ModelParams(p, c, c_m, delta, support_lo, support_hi);
}

ModelParams ModelParams::with_delta(double delta) const {
  return make(p_, c_, c_m_, delta, support_lo_, support_hi_);
}

ModelParams ModelParams::with_support(double lo, double hi) const {
  return make(p_, c_, c_m_, delta_, lo, hi);
}

bool in_policy_box(const ModelParams& params, const Policy& policy, double tol) {
  return policy.q <= policy.x + tol && policy.q >= params.box_lo() - tol &&
         policy.x <= params.box_hi() + tol;
}

double demand(const ModelParams& params, double y) {
  if (!(y >= 0.0)) throw std::domain_error(fmt::format("market size must be >= 0, got {}", y));
  return params.one_minus_p() * y;
}

double second_stage_quantity(const ModelParams& params, const Policy& policy, double y) {
  const double d = demand(params, y);
  return std::min(std::max(d - policy.q, 0.0), policy.x - policy.q);
}

kernels::ProfitCoefficients profit_coefficients(const ModelParams& params, const Policy& policy) {
  const double margin = params.p() - params.c() - params.delta();
  return {
      .one_minus_p = params.one_minus_p(),
      .price = params.p(),
      .qr_margin = margin,
      .first_intercept = -params.c_m() * policy.x - params.c() * policy.q,
      .second_intercept = -params.c_m() * policy.x + params.delta() * policy.q,
      .capped_profit = (margin - params.c_m()) * policy.x + params.delta() * policy.q,
  };
}

double profit(const ModelParams& params, const Policy& policy, double y) {
  const auto k = profit_coefficients(params, policy);
  const double d = demand(params, y);
  return std::min({params.p() * d + k.first_intercept, k.qr_margin * d + k.second_intercept,
                   k.capped_profit});
}

double profit_case_split(const ModelParams& params, const Policy& policy, double y) {
  const double d = demand(params, y);
  const double p = params.p();
  const double c = params.c();
  const double cm = params.c_m();
  const double delta = params.delta();
  const double x = policy.x;
  const double q = policy.q;
  if (d < q) return p * d - cm * x - c * q;
  if (d <= x) return (p - (c + delta)) * d - cm * x + delta * q;
  return (p - (c + delta) - cm) * x + delta * q;
}

double fulfilled_demand(const ModelParams& params, double x, double y) {
  return std::min(demand(params, y), x);
}

double total_waste(const ModelParams& params, double x, double y) {
  return std::max(x - demand(params, y), 0.0);
}

double unsold_goods(const ModelParams& params, const Policy& policy, double y) {
  return std::max(policy.q - demand(params, y), 0.0);
}

double unused_fabric(const ModelParams& params, const Policy& policy, double y) {
  return std::max(policy.x - policy.q - second_stage_quantity(params, policy, y), 0.0);
}

double wtc_integrand(const ModelParams& params, double x, double tau, double y) {
  return std::max(x - (1.0 + tau) * demand(params, y), -tau * x);
}

}  // namespace qrdro
