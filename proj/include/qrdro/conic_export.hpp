#pragma once

// Explicit second-order cone programs for the Wasserstein models, built as
// data for external solvers and for checking internal solutions against the
// full constraint system. Nothing here solves a conic program.
//
// A program is: bounded variables, a linear objective to maximize, a pool of
// affine expressions, linear rows "expr >= 0" and cone blocks
// "||(member_1, ..., member_k)|| <= head", all referring to pool entries.
// The text format is documented in docs/conic_format.md.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qrdro/core_model.hpp"
#include "qrdro/wasserstein_dro.hpp"

namespace qrdro::conic {

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;

  friend bool operator==(const Variable&, const Variable&) = default;
};

/// constant + sum of coefficient * variable.
struct AffineExpr {
  double constant = 0.0;
  std::vector<std::pair<std::size_t, double>> terms;

  friend bool operator==(const AffineExpr&, const AffineExpr&) = default;
};

struct SocBlock {
  std::size_t head = 0;
  std::vector<std::size_t> members;

  friend bool operator==(const SocBlock&, const SocBlock&) = default;
};

struct ConicProgram {
  std::vector<Variable> variables;
  AffineExpr objective;  // maximized
  std::vector<AffineExpr> expressions;
  std::vector<std::size_t> linear_rows;  // expressions[row] >= 0
  std::vector<SocBlock> soc_blocks;

  /// Throws std::out_of_range if there is no variable of that name.
  std::size_t index_of(const std::string& name) const;

  friend bool operator==(const ConicProgram&, const ConicProgram&) = default;
};

/// Dual reformulation of the worst-case expected profit over the Wasserstein
/// ball. Per sample i it holds two 3-dimensional cones with their companion
/// rows and the row gamma_i <= (p - c - delta - c_m) x + delta q; the policy
/// row is x - q >= 0. With tau it adds alpha, per-sample kappa_i, beta_i,
/// zeta_i, one cone and two rows per sample and eps^2 alpha + mean kappa <= 0.
ConicProgram build_socp(const ModelParams& params, const WassersteinAmbiguity& amb,
                        std::optional<double> tau = std::nullopt);

std::string serialize(const ConicProgram& program);
void serialize(std::ostream& out, const ConicProgram& program);
/// Throws std::runtime_error naming the line on malformed input.
ConicProgram parse(const std::string& text);

double evaluate(const AffineExpr& expr, const std::vector<double>& assignment);

struct FeasibilityReport {
  double objective = 0.0;
  double max_violation = 0.0;
  /// Human-readable location of the largest violation, empty if none.
  std::string worst;
};

/// Evaluates every bound, row and cone at the assignment.
FeasibilityReport check_candidate(const ConicProgram& program, const std::vector<double>& assignment);

/// Extends an internal solution (x, q) to a point of build_socp(params, amb, tau):
/// lambda and gamma_i from the profit dual, alpha and kappa_i from the waste
/// dual. For each inner problem with slope a the clamp multipliers are zero when
/// the minimizer z* is interior; when z* = y_lo the lower one is a + 2 lambda (y_lo - y_i)
/// and when z* = y_hi the upper one is -(a + 2 lambda (y_hi - y_i)); at lambda = 0
/// the lower one is a. Requires a positive radius (with radius 0 the dual
/// optimum is not attained).
std::vector<double> lift_solution(const ModelParams& params, const WassersteinAmbiguity& amb,
                                  const Policy& policy, std::optional<double> tau = std::nullopt);

}  // namespace qrdro::conic
