#include "qrdro/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "qrdro/kernels/kernels.hpp"
#include "qrdro/mad_dro.hpp"
#include "qrdro/wasserstein_dro.hpp"

namespace qrdro {

namespace {

constexpr std::uint64_t kInSampleTag = 1;
constexpr std::uint64_t kEvalTag = 2;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct TrialData {
  SampleSet in_sample;
  SampleSet eval;
  double support_lo = 0.0;
  double support_hi = 1.0;
};

std::pair<double, double> resolve_support(const TrialConfig& config, const SampleSet& in) {
  const auto natural = std::visit(
      [&](const auto& d) -> std::pair<double, double> {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Uniform>) {
          return {d.lo, d.hi};
        } else if constexpr (std::is_same_v<T, Beta>) {
          return {0.0, 1.0};
        } else if constexpr (std::is_same_v<T, Empirical>) {
          return {0.0, *std::max_element(d.samples.begin(), d.samples.end())};
        } else {
          return {0.0, capped_support_hi(in.view(), config.support.cap)};
        }
      },
      config.true_dist);
  return {config.support.lo.value_or(natural.first), config.support.hi.value_or(natural.second)};
}

TrialData draw_trial(const TrialConfig& config, std::size_t trial_index) {
  TrialData t;
  t.in_sample = sample(config.true_dist, config.n_in,
                       substream_seed(config.base_seed, trial_index, kInSampleTag));
  t.eval = sample(config.true_dist, config.n_eval,
                  substream_seed(config.base_seed, trial_index, kEvalTag));
  std::tie(t.support_lo, t.support_hi) = resolve_support(config, t.in_sample);
  return t;
}

struct Fit {
  Policy policy;
  double value;
};

Fit fit_method(Method m, const TrialConfig& config, const ModelParams& params,
               std::optional<double> tau, const SampleSet& in) {
  switch (m) {
    case Method::mad: {
      const auto amb = MadAmbiguity::make(estimate_moments(in), params.support_lo(), params.support_hi());
      const auto r = tau ? solve_wtc_constrained(params, amb, *tau) : solve_closed_form(params, amb);
      return {r.policy, r.value};
    }
    case Method::wasserstein:
    case Method::saa: {
      if (m == Method::saa && !tau) {
        const auto r = saa_solve(params, in);
        return {r.policy, r.value};
      }
      const double eps = m == Method::saa ? 0.0
                                          : config.wasserstein_epsilon.value_or(
                                                radius_from_samples(in.size(), config.wasserstein_C));
      const auto amb = WassersteinAmbiguity::make(in, eps, params.support_lo(), params.support_hi());
      const auto r = tau ? solve_wtc_constrained(params, amb, *tau) : solve(params, amb);
      return {r.policy, r.value};
    }
    case Method::benchmark: {
      const auto r = uniform_benchmark_solve(params, config.benchmark_fit, &in);
      return {r.policy, r.value};
    }
    case Method::nqr: {
      const auto r = nqr_solve(params, in);
      return {r.policy, r.value};
    }
  }
  throw std::logic_error("unknown method");
}

TrialResult evaluate_trial(const TrialConfig& config, const ModelParams& params,
                           std::optional<double> tau, std::size_t trial_index,
                           const TrialData& data) {
  TrialResult out;
  out.trial_index = trial_index;
  out.support_lo = data.support_lo;
  out.support_hi = data.support_hi;
  const auto eval = data.eval.view();
  for (Method m : config.methods) {
    MethodTrialOutcome o;
    o.method = m;
    try {
      const Fit f = fit_method(m, config, params, tau, data.in_sample);
      o.policy = f.policy;
      o.in_model_value = f.value;
      o.profit = mc_expected_profit(params, f.policy, eval);
      const auto sums = kernels::waste_fulfilled_sums(params.one_minus_p(), f.policy.x, eval);
      o.waste_sum = sums.waste;
      o.fulfilled_sum = sums.fulfilled;
      o.wtc_ratio = sums.fulfilled > 0.0 ? sums.waste / sums.fulfilled
                    : sums.waste > 0.0   ? std::numeric_limits<double>::infinity()
                                         : 0.0;
      o.ok = true;
    } catch (const std::exception& e) {
      o.ok = false;
      o.failure = e.what();
    }
    out.outcomes.push_back(std::move(o));
  }
  return out;
}

MethodOutcome aggregate(const std::vector<const MethodTrialOutcome*>& trials) {
  MethodOutcome a;
  std::vector<double> profits;
  std::vector<double> xs;
  std::vector<double> qs;
  std::vector<double> wastes;
  std::vector<double> fulfilled;
  std::vector<double> ratios;
  std::size_t covered = 0;
  a.max_trial_wtc_ratio = 0.0;
  for (const auto* t : trials) {
    if (!t->ok) {
      ++a.failures;
      continue;
    }
    profits.push_back(t->profit);
    xs.push_back(t->policy.x);
    qs.push_back(t->policy.q);
    wastes.push_back(t->waste_sum);
    fulfilled.push_back(t->fulfilled_sum);
    if (t->profit >= t->in_model_value) ++covered;
    ratios.push_back(t->wtc_ratio);
    a.max_trial_wtc_ratio = std::max(a.max_trial_wtc_ratio, t->wtc_ratio);
  }
  a.n_trials = profits.size();
  if (a.n_trials == 0) {
    a.mean_x = a.mean_q = a.mean_profit = a.std_profit = a.se_profit = a.wtc_ratio = kNaN;
    a.pooled_wtc_ratio = a.max_trial_wtc_ratio = kNaN;
    a.coverage = kNaN;
    return a;
  }
  const double n = static_cast<double>(a.n_trials);
  a.mean_x = kernels::canonical_sum(xs) / n;
  a.mean_q = kernels::canonical_sum(qs) / n;
  a.mean_profit = kernels::canonical_sum(profits) / n;
  if (a.n_trials > 1) {
    std::vector<double> sq(profits.size());
    for (std::size_t i = 0; i < profits.size(); ++i) {
      const double dev = profits[i] - a.mean_profit;
      sq[i] = dev * dev;
    }
    a.std_profit = std::sqrt(kernels::canonical_sum(sq) / (n - 1.0));
  }
  a.se_profit = a.std_profit / std::sqrt(n);
  const double total_fulfilled = kernels::canonical_sum(fulfilled);
  a.wtc_ratio = kernels::canonical_sum(ratios) / n;
  a.pooled_wtc_ratio = total_fulfilled > 0.0 ? kernels::canonical_sum(wastes) / total_fulfilled : kNaN;
  a.coverage = static_cast<double>(covered) / n;
  return a;
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::mad: return "mad";
    case Method::wasserstein: return "wasserstein";
    case Method::saa: return "saa";
    case Method::benchmark: return "benchmark";
    case Method::nqr: return "nqr";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : all_methods())
    if (method_name(m) == name) return m;
  return std::nullopt;
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> all{Method::mad, Method::wasserstein, Method::saa,
                                       Method::benchmark, Method::nqr};
  return all;
}

double mc_expected_profit(const ModelParams& params, const Policy& policy,
                          std::span<const double> eval_samples) {
  if (eval_samples.empty()) throw std::invalid_argument("evaluation needs at least one sample");
  return kernels::profit_sum(profit_coefficients(params, policy), eval_samples) /
         static_cast<double>(eval_samples.size());
}

double mc_wtc_ratio(const ModelParams& params, const Policy& policy,
                    std::span<const double> eval_samples) {
  if (eval_samples.empty()) throw std::invalid_argument("evaluation needs at least one sample");
  const auto sums = kernels::waste_fulfilled_sums(params.one_minus_p(), policy.x, eval_samples);
  if (!(sums.fulfilled > 0.0))
    throw std::domain_error("waste-to-consumption ratio undefined: no demand is fulfilled");
  return sums.waste / sums.fulfilled;
}

void validate(const TrialConfig& config) {
  if (config.n_in == 0) throw std::invalid_argument("n_in must be >= 1");
  if (config.n_eval == 0) throw std::invalid_argument("n_eval must be >= 1");
  if (config.n_trials == 0) throw std::invalid_argument("n_trials must be >= 1");
  if (config.methods.empty()) throw std::invalid_argument("at least one method is required");
  if (config.delta_grid.empty()) throw std::invalid_argument("delta grid is empty");
  for (double t : config.tau_grid)
    if (!(t >= 0.0 && std::isfinite(t))) throw std::invalid_argument(fmt::format("tau must be >= 0, got {}", t));
  if (!(config.wasserstein_C >= 0.0)) throw std::invalid_argument("wasserstein C must be >= 0");
  if (config.wasserstein_epsilon && !(*config.wasserstein_epsilon >= 0.0))
    throw std::invalid_argument("wasserstein epsilon must be >= 0");
  validate(config.true_dist);
}

TrialResult run_trial(const TrialConfig& config, const ModelParams& params,
                      std::optional<double> tau, std::size_t trial_index) {
  validate(config);
  const TrialData data = draw_trial(config, trial_index);
  const auto cell = ModelParams::make(params.p(), params.c(), params.c_m(), params.delta(),
                                      data.support_lo, data.support_hi);
  return evaluate_trial(config, cell, tau, trial_index, data);
}

const ReportRow* ExperimentReport::find(Method m, double delta, std::optional<double> tau) const {
  for (const auto& r : rows)
    if (r.method == m && std::abs(r.delta - delta) < 1e-12 && r.tau.has_value() == tau.has_value() &&
        (!tau || std::abs(*r.tau - *tau) < 1e-12))
      return &r;
  return nullptr;
}

ExperimentReport run_experiment(const TrialConfig& config, const ModelParams& params_base) {
  validate(config);
  std::vector<std::optional<double>> taus;
  if (config.tau_grid.empty()) {
    taus.push_back(std::nullopt);
  } else {
    for (double t : config.tau_grid) taus.push_back(t);
  }

  struct Cell {
    double delta;
    std::optional<double> tau;
    std::string error;
  };
  std::vector<Cell> cells;
  for (double delta : config.delta_grid) {
    std::string error;
    try {
      (void)params_base.with_delta(delta);
    } catch (const std::exception& e) {
      error = e.what();
    }
    for (const auto& tau : taus) cells.push_back({delta, tau, error});
  }

  // results[trial][cell]
  std::vector<std::vector<TrialResult>> results(config.n_trials);
  std::vector<std::exception_ptr> errors(config.n_trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < config.n_trials; t = next++) {
      try {
        const TrialData data = draw_trial(config, t);
        auto& row = results[t];
        row.resize(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
          if (!cells[c].error.empty()) continue;
          const auto params = ModelParams::make(params_base.p(), params_base.c(), params_base.c_m(),
                                                cells[c].delta, data.support_lo, data.support_hi);
          row[c] = evaluate_trial(config, params, cells[c].tau, t, data);
        }
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(config.jobs, 1, config.n_trials);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  ExperimentReport report;
  const std::string label = describe(config.true_dist);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (std::size_t k = 0; k < config.methods.size(); ++k) {
      ReportRow row{label, config.methods[k], cells[c].delta, cells[c].tau, {}, cells[c].error};
      if (row.error.empty()) {
        std::vector<const MethodTrialOutcome*> per_trial;
        for (std::size_t t = 0; t < config.n_trials; ++t) per_trial.push_back(&results[t][c].outcomes[k]);
        row.outcome = aggregate(per_trial);
      } else {
        row.outcome.mean_x = row.outcome.mean_q = row.outcome.mean_profit = kNaN;
        row.outcome.std_profit = row.outcome.se_profit = row.outcome.wtc_ratio = kNaN;
        row.outcome.pooled_wtc_ratio = row.outcome.max_trial_wtc_ratio = kNaN;
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

}  // namespace qrdro
