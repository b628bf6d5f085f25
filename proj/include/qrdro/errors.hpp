#pragma once

#include <stdexcept>
#include <string>

namespace qrdro {

/// A constrained problem has no feasible policy. `min_constraint_value` is the
/// smallest worst-case constraint value found over the policy box (> 0).
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, double min_constraint_value)
      : std::runtime_error(what), min_constraint_value_(min_constraint_value) {}

  double min_constraint_value() const { return min_constraint_value_; }

 private:
  double min_constraint_value_;
};

}  // namespace qrdro
