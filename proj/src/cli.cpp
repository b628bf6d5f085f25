#include "qrdro/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "qrdro/baselines.hpp"
#include "qrdro/config.hpp"
#include "qrdro/conic_export.hpp"
#include "qrdro/errors.hpp"
#include "qrdro/mad_dro.hpp"
#include "qrdro/wasserstein_dro.hpp"

namespace qrdro::cli {

namespace {

constexpr std::uint64_t kCliSampleTag = 1;
constexpr std::uint64_t kCliEvalTag = 3;

struct Globals {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  std::string policy_path;
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + '"';
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string tau_field(const std::optional<double>& tau) { return tau ? num(*tau) : std::string(); }

RunConfig load(const Globals& g) {
  RunConfig cfg = load_config(g.config_path);
  if (g.seed) cfg.base_seed = *g.seed;
  if (!g.out_dir.empty()) cfg.output_dir = g.out_dir;
  return cfg;
}

double single_delta(const RunConfig& cfg, const char* command) {
  if (cfg.delta_grid.size() != 1 || cfg.delta_is_grid)
    throw ConfigError(fmt::format("{} needs a single [model] delta", command));
  return cfg.delta_grid.front();
}

std::optional<double> single_tau(const RunConfig& cfg, const char* command) {
  if (cfg.tau_grid.empty()) return std::nullopt;
  if (cfg.tau_grid.size() > 1) throw ConfigError(fmt::format("{} needs a single [wtc] tau", command));
  return cfg.tau_grid.front();
}

std::optional<SampleSet> load_samples(const RunConfig& cfg) {
  if (cfg.samples_file) {
    std::ifstream in(*cfg.samples_file);
    if (!in) throw ConfigError(fmt::format("cannot open sample file '{}'", *cfg.samples_file));
    SampleSet s;
    try {
      s.values = read_samples(in);
    } catch (const std::exception& e) {
      throw ConfigError(fmt::format("{}: {}", *cfg.samples_file, e.what()));
    }
    if (s.values.empty()) throw ConfigError(fmt::format("{}: no samples", *cfg.samples_file));
    return s;
  }
  if (cfg.distribution)
    return sample(*cfg.distribution, cfg.n_in, substream_seed(cfg.base_seed, 0, kCliSampleTag));
  return std::nullopt;
}

std::pair<double, double> solver_support(const RunConfig& cfg, const std::optional<SampleSet>& samples) {
  std::optional<double> lo = cfg.support.lo;
  std::optional<double> hi = cfg.support.hi;
  if (cfg.distribution && has_bounded_support(*cfg.distribution)) {
    const auto natural = std::visit(
        [](const auto& d) -> std::pair<double, double> {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Uniform>) return {d.lo, d.hi};
          else if constexpr (std::is_same_v<T, Empirical>)
            return {0.0, *std::max_element(d.samples.begin(), d.samples.end())};
          else return {0.0, 1.0};
        },
        *cfg.distribution);
    if (!lo) lo = natural.first;
    if (!hi) hi = natural.second;
  }
  if (!lo) lo = 0.0;
  if (!hi && samples) hi = capped_support_hi(samples->view(), cfg.support.cap);
  if (!hi) throw ConfigError("[support] hi is needed (no bounded distribution or samples to derive it)");
  return {*lo, *hi};
}

ModelParams make_params(const RunConfig& cfg, double delta, double lo, double hi) {
  try {
    return ModelParams::make(cfg.p, cfg.c, cfg.c_m, delta, lo, hi);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

const SampleSet& need_samples(const std::optional<SampleSet>& s, Method m) {
  if (!s)
    throw ConfigError(fmt::format("method {} needs data: set [data] samples_file or a [distribution]",
                                  method_name(m)));
  return *s;
}

double wasserstein_radius(const RunConfig& cfg, std::size_t n) {
  return cfg.wasserstein_epsilon.value_or(radius_from_samples(n, cfg.wasserstein_C));
}

void print_policy(std::ostream& out, Method m, const Policy& pol, double value, const std::string& extra) {
  out << fmt::format("{}: policy ({:.6g}, {:.6g}) value {:.6g}{}\n", method_name(m), pol.x, pol.q, value, extra);
}

int cmd_solve(const Globals& g, std::ostream& out) {
  const RunConfig cfg = load(g);
  const double delta = single_delta(cfg, "solve");
  const auto tau = single_tau(cfg, "solve");
  const auto samples = load_samples(cfg);
  const auto [lo, hi] = solver_support(cfg, samples);
  const ModelParams params = make_params(cfg, delta, lo, hi);
  int status = kOk;
  for (Method m : cfg.methods) {
    try {
      switch (m) {
        case Method::mad: {
          MomentSummary mom;
          if (cfg.moments) mom = *cfg.moments;
          else mom = estimate_moments(need_samples(samples, m));
          const auto amb = MadAmbiguity::make(mom, lo, hi);
          if (amb.clamped())
            out << fmt::format("mad: note: MAD {:.6g} exceeds the support bound, clamped to {:.6g}\n",
                               amb.requested_mad(), amb.mad());
          const auto r = tau ? solve_wtc_constrained(params, amb, *tau) : solve_closed_form(params, amb);
          print_policy(out, m, r.policy, r.value, " case " + r.case_label);
          break;
        }
        case Method::wasserstein:
        case Method::saa: {
          const auto& s = need_samples(samples, m);
          if (m == Method::saa && !tau) {
            const auto r = saa_solve(params, s);
            print_policy(out, m, r.policy, r.value, "");
            break;
          }
          const double eps = m == Method::saa ? 0.0 : wasserstein_radius(cfg, s.size());
          const auto amb = WassersteinAmbiguity::make(s, eps, lo, hi);
          const auto r = tau ? solve_wtc_constrained(params, amb, *tau) : solve(params, amb);
          print_policy(out, m, r.policy, r.value, fmt::format(" epsilon {:.6g} lambda {:.6g}", eps, r.lambda_star));
          break;
        }
        case Method::benchmark: {
          const auto r = uniform_benchmark_solve(params, cfg.benchmark_fit, samples ? &*samples : nullptr);
          print_policy(out, m, r.policy, r.value, "");
          break;
        }
        case Method::nqr: {
          const auto r = nqr_solve(params, need_samples(samples, m));
          print_policy(out, m, r.policy, r.value, "");
          break;
        }
      }
    } catch (const InfeasibleError& e) {
      out << fmt::format("{}: infeasible: {}\n", method_name(m), e.what());
      status = kInfeasible;
    }
  }
  return status;
}

void write_file(const std::filesystem::path& path, const std::string& content, std::ostream& out) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  f << content;
  if (!f) throw std::runtime_error(fmt::format("error writing '{}'", path.string()));
  out << "wrote " << path.string() << '\n';
}

int cmd_experiment(const Globals& g, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load(g);
  const ModelParams base = make_params(cfg, 0.0, 0.0, 1.0);
  std::vector<std::size_t> sizes = cfg.n_in_grid.empty() ? std::vector<std::size_t>{cfg.n_in} : cfg.n_in_grid;
  for (std::size_t n_in : sizes) {
    TrialConfig tc = to_trial_config(cfg, n_in);
    tc.jobs = g.jobs;
    const ExperimentReport report = run_experiment(tc, base);
    for (const auto& row : report.rows)
      if (!row.error.empty())
        err << fmt::format("warning: delta {} skipped: {}\n", row.delta, row.error);
    const std::string stem = cfg.n_in_grid.empty() ? "experiment" : fmt::format("experiment_n{}", n_in);
    std::ostringstream csv;
    write_csv(csv, report);
    write_file(std::filesystem::path(cfg.output_dir) / (stem + ".csv"), csv.str(), out);
    std::ostringstream detail;
    write_detail_csv(detail, report);
    write_file(std::filesystem::path(cfg.output_dir) / (stem + "_detail.csv"), detail.str(), out);
  }
  return kOk;
}

int cmd_export(const Globals& g, std::ostream& out) {
  const RunConfig cfg = load(g);
  const double delta = single_delta(cfg, "export-conic");
  const auto tau = single_tau(cfg, "export-conic");
  const auto samples = load_samples(cfg);
  if (!samples) throw ConfigError("export-conic needs data: set [data] samples_file or a [distribution]");
  const auto [lo, hi] = solver_support(cfg, samples);
  const ModelParams params = make_params(cfg, delta, lo, hi);
  const auto amb = WassersteinAmbiguity::make(*samples, wasserstein_radius(cfg, samples->size()), lo, hi);
  const auto program = conic::build_socp(params, amb, tau);
  write_file(std::filesystem::path(cfg.output_dir) / "socp.conic", conic::serialize(program), out);
  return kOk;
}

Policy read_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open policy file '{}'", path));
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    for (std::string tok; ls >> tok;) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end != tok.c_str() + tok.size() || !std::isfinite(v))
        throw ConfigError(fmt::format("{}: not a number: '{}'", path, tok));
      values.push_back(v);
    }
  }
  if (values.size() != 2) throw ConfigError(fmt::format("{}: expected two numbers 'x q'", path));
  if (values[1] > values[0]) throw ConfigError(fmt::format("{}: policy needs q <= x", path));
  return {values[0], values[1]};
}

int cmd_eval(const Globals& g, std::ostream& out) {
  const RunConfig cfg = load(g);
  if (!cfg.distribution) throw ConfigError("eval needs a [distribution] section");
  const double delta = single_delta(cfg, "eval");
  const Policy pol = read_policy(g.policy_path);
  const ModelParams params = make_params(cfg, delta, 0.0, 1.0);
  const auto eval = sample(*cfg.distribution, cfg.n_eval, substream_seed(cfg.base_seed, 0, kCliEvalTag));
  const double mean = mc_expected_profit(params, pol, eval.view());
  std::vector<double> sq(eval.size());
  for (std::size_t i = 0; i < eval.size(); ++i) {
    const double d = profit(params, pol, eval.values[i]) - mean;
    sq[i] = d * d;
  }
  const double n = static_cast<double>(eval.size());
  const double se = eval.size() > 1 ? std::sqrt(kernels::canonical_sum(sq) / (n - 1.0) / n) : 0.0;
  const auto sums = kernels::waste_fulfilled_sums(params.one_minus_p(), pol.x, eval.view());
  const double ratio = sums.fulfilled > 0.0 ? sums.waste / sums.fulfilled : std::nan("");
  out << fmt::format("distribution {}\npolicy ({:.6g}, {:.6g})\nmean_profit {:.8g}\nse_profit {:.3g}\nwtc_ratio {:.6g}\nn_eval {}\n",
                     describe(*cfg.distribution), pol.x, pol.q, mean, se, ratio, eval.size());
  return kOk;
}

}  // namespace

void write_csv(std::ostream& out, const ExperimentReport& report) {
  out << "distribution,method,delta,tau,mean_x,mean_q,mean_profit,std_profit,wtc_ratio,n_trials\n";
  for (const auto& r : report.rows) {
    const auto& o = r.outcome;
    out << csv_field(r.distribution) << ',' << method_name(r.method) << ',' << num(r.delta) << ','
        << tau_field(r.tau) << ',' << num(o.mean_x) << ',' << num(o.mean_q) << ','
        << num(o.mean_profit) << ',' << num(o.std_profit) << ',' << num(o.wtc_ratio) << ','
        << o.n_trials << '\n';
  }
}

void write_detail_csv(std::ostream& out, const ExperimentReport& report) {
  out << "distribution,method,delta,tau,mean_profit,se_profit,wtc_ratio,pooled_wtc_ratio,"
         "max_trial_wtc_ratio,coverage,n_trials,failures,error\n";
  for (const auto& r : report.rows) {
    const auto& o = r.outcome;
    out << csv_field(r.distribution) << ',' << method_name(r.method) << ',' << num(r.delta) << ','
        << tau_field(r.tau) << ',' << num(o.mean_profit) << ',' << num(o.se_profit) << ','
        << num(o.wtc_ratio) << ',' << num(o.pooled_wtc_ratio) << ',' << num(o.max_trial_wtc_ratio) << ',' << num(o.coverage) << ','
        << o.n_trials << ',' << o.failures << ',' << csv_field(r.error) << '\n';
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distributionally robust quick-response production policies"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--out", g.out_dir, "Output directory (overrides [output] dir)");
  app.add_option("--seed", g.seed, "Base seed (overrides [experiment] base_seed)");
  app.add_option("--jobs", g.jobs, "Worker threads for experiment trials")->check(CLI::PositiveNumber);

  auto* solve_cmd = app.add_subcommand("solve", "Solve one instance with each configured method");
  auto* exp_cmd = app.add_subcommand("experiment", "Run the trial sweep and write CSV results");
  auto* export_cmd = app.add_subcommand("export-conic", "Write the Wasserstein conic program");
  auto* eval_cmd = app.add_subcommand("eval", "Score a policy by Monte Carlo on the configured distribution");
  for (auto* sub : {solve_cmd, exp_cmd, export_cmd, eval_cmd}) {
    sub->fallthrough();
    sub->add_option("--config", g.config_path, "Configuration file")->required();
  }
  eval_cmd->add_option("--policy", g.policy_path, "File holding 'x q'")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*solve_cmd) return cmd_solve(g, out);
    if (*exp_cmd) return cmd_experiment(g, out, err);
    if (*export_cmd) return cmd_export(g, out);
    if (*eval_cmd) return cmd_eval(g, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

}  // namespace qrdro::cli
