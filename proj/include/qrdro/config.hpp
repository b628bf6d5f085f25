#pragma once

// Run configuration: an INI-style file of [sections] holding key = value
// lines. '#' and ';' start comments. Unknown sections or keys, duplicates and
// malformed values are rejected with "file:line: message". The schema is
// documented in docs/config.md.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qrdro/baselines.hpp"
#include "qrdro/distributions.hpp"
#include "qrdro/evaluation.hpp"

namespace qrdro {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  // [model]
  double p = 0.0;
  double c = 0.0;
  double c_m = 0.0;
  std::vector<double> delta_grid;  // a single `delta` is stored as a one-element grid
  bool delta_is_grid = false;

  // [support]
  SupportSpec support;

  // [distribution]
  std::optional<DemandDistribution> distribution;

  // [data]
  std::optional<MomentSummary> moments;
  std::optional<std::string> samples_file;

  // [methods]
  std::vector<Method> methods = all_methods();

  // [wasserstein]
  double wasserstein_C = 0.1;
  std::optional<double> wasserstein_epsilon;

  // [wtc]
  std::vector<double> tau_grid;

  // [experiment]
  std::size_t n_in = 10;
  std::size_t n_eval = 10000;
  std::size_t n_trials = 50;
  std::uint64_t base_seed = 20240601;
  std::vector<std::size_t> n_in_grid;

  // [benchmark]
  BenchmarkFit benchmark_fit = BenchmarkFit::fixed_unit;

  // [output]
  std::string output_dir = ".";
};

/// `source` names the input in error messages; relative file paths in the
/// config are resolved against `base_dir`.
RunConfig parse_config(std::istream& in, const std::string& source, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

/// 0.00, 0.02, ..., 0.34
std::vector<double> default_delta_grid();

/// Experiment settings for one in-sample size. Throws ConfigError when no
/// distribution is configured.
TrialConfig to_trial_config(const RunConfig& config, std::size_t n_in);

}  // namespace qrdro
