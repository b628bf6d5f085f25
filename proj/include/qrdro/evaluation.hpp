#pragma once

// Seeded Monte-Carlo out-of-sample evaluation and the trial protocol: each
// trial draws a small in-sample set, fits every configured method on it, and
// scores all fitted policies on one shared evaluation set drawn from the
// true distribution.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qrdro/baselines.hpp"
#include "qrdro/core_model.hpp"
#include "qrdro/distributions.hpp"

namespace qrdro {

enum class Method { mad, wasserstein, saa, benchmark, nqr };

std::string_view method_name(Method m);
/// Accepts the names produced by method_name.
std::optional<Method> parse_method(std::string_view name);
const std::vector<Method>& all_methods();

/// Arithmetic mean of the profit over the evaluation samples. Throws on empty input.
double mc_expected_profit(const ModelParams& params, const Policy& policy,
                          std::span<const double> eval_samples);

/// (sum of waste) / (sum of fulfilled demand) over the evaluation samples.
/// Throws std::domain_error when nothing is fulfilled.
double mc_wtc_ratio(const ModelParams& params, const Policy& policy,
                    std::span<const double> eval_samples);

/// Support used by the ambiguity sets. Unset ends are derived per trial: the
/// true support for bounded families, and [0, cap] from the in-sample maximum
/// for the lognormal.
struct SupportSpec {
  std::optional<double> lo;
  std::optional<double> hi;
  SupportCapRule cap;
};

struct TrialConfig {
  std::size_t n_in = 10;
  std::size_t n_eval = 10000;
  std::size_t n_trials = 50;
  std::uint64_t base_seed = 20240601;
  DemandDistribution true_dist = Uniform{0.0, 1.0};
  std::vector<Method> methods = all_methods();
  std::vector<double> delta_grid = {0.1};
  /// Empty: unconstrained only. Otherwise every cell carries a waste bound tau.
  std::vector<double> tau_grid;
  double wasserstein_C = 0.1;
  /// Overrides the C / sqrt(n_in) schedule when set.
  std::optional<double> wasserstein_epsilon;
  SupportSpec support;
  BenchmarkFit benchmark_fit = BenchmarkFit::fixed_unit;
  /// Worker threads for independent trials; results do not depend on it.
  std::size_t jobs = 1;
};

/// Throws std::invalid_argument when a count is zero or a grid is empty.
void validate(const TrialConfig& config);

struct MethodTrialOutcome {
  Method method = Method::saa;
  bool ok = false;
  std::string failure;
  Policy policy;
  /// The method's own objective value (worst-case or in-sample).
  double in_model_value = 0.0;
  double profit = 0.0;
  double waste_sum = 0.0;
  double fulfilled_sum = 0.0;
  /// waste_sum / fulfilled_sum. A policy that neither fulfills nor wastes
  /// anything (x = 0) scores 0.
  double wtc_ratio = 0.0;
};

struct TrialResult {
  std::size_t trial_index = 0;
  double support_lo = 0.0;
  double support_hi = 0.0;
  std::vector<MethodTrialOutcome> outcomes;
};

/// One trial at fixed (params.delta, tau). In-sample data come from substream
/// (base_seed, trial_index); the evaluation set from an independent substream
/// of the same trial. Method failures (e.g. infeasibility) are recorded, not thrown.
TrialResult run_trial(const TrialConfig& config, const ModelParams& params,
                      std::optional<double> tau, std::size_t trial_index);

struct MethodOutcome {
  double mean_x = 0.0;
  double mean_q = 0.0;
  double mean_profit = 0.0;
  double std_profit = 0.0;
  /// std_profit / sqrt(n_trials)
  double se_profit = 0.0;
  /// Mean over trials of the per-trial ratio.
  double wtc_ratio = 0.0;
  /// Total waste / total fulfilled demand over all trials.
  double pooled_wtc_ratio = 0.0;
  double max_trial_wtc_ratio = 0.0;
  /// Fraction of trials whose out-of-sample profit reached the in-model value.
  double coverage = 0.0;
  std::size_t n_trials = 0;
  std::size_t failures = 0;
};

struct ReportRow {
  std::string distribution;
  Method method = Method::saa;
  double delta = 0.0;
  std::optional<double> tau;
  MethodOutcome outcome;
  /// Set when the grid point itself is invalid (e.g. p <= c + delta + c_m).
  std::string error;
};

struct ExperimentReport {
  std::vector<ReportRow> rows;

  const ReportRow* find(Method m, double delta, std::optional<double> tau = std::nullopt) const;
};

/// Runs the (delta, tau) grid for n_trials trials each. params_base supplies p, c,
/// c_m; its delta and support are replaced per cell and per trial.
ExperimentReport run_experiment(const TrialConfig& config, const ModelParams& params_base);

}  // namespace qrdro
