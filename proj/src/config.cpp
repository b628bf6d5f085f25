#include "qrdro/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include <fmt/format.h>

namespace qrdro {

namespace {

struct Entry {
  std::string value;
  std::size_t line = 0;
};

using Section = std::map<std::string, Entry>;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"model", {"p", "c", "c_m", "delta", "delta_grid"}},
      {"support", {"lo", "hi", "cap_factor", "cap_floor"}},
      {"distribution", {"kind", "lo", "hi", "log_mean", "log_std", "alpha", "beta", "file"}},
      {"data", {"mean", "mad", "samples_file"}},
      {"methods", {"list"}},
      {"wasserstein", {"C", "epsilon"}},
      {"wtc", {"tau", "tau_grid"}},
      {"experiment", {"n_in", "n_eval", "n_trials", "base_seed", "n_in_grid"}},
      {"benchmark", {"fit"}},
      {"output", {"dir"}},
  };
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class Parsed {
 public:
  Parsed(std::string source, std::string base_dir)
      : source_(std::move(source)), base_dir_(std::move(base_dir)) {}

  void read(std::istream& in) {
    std::string raw;
    std::size_t line_no = 0;
    std::string current;
    while (std::getline(in, raw)) {
      ++line_no;
      std::string line = raw;
      const auto hash = line.find_first_of("#;");
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') fail(line_no, fmt::format("malformed section header '{}'", line));
        current = trim(line.substr(1, line.size() - 2));
        if (!schema().count(current)) fail(line_no, fmt::format("unknown section [{}]", current));
        if (!seen_sections_.insert(current).second)
          fail(line_no, fmt::format("section [{}] appears twice", current));
        sections_[current];
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) fail(line_no, fmt::format("expected 'key = value', got '{}'", line));
      if (current.empty()) fail(line_no, "key outside of any section");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (!schema().at(current).count(key))
        fail(line_no, fmt::format("unknown key '{}' in section [{}]", key, current));
      if (value.empty()) fail(line_no, fmt::format("empty value for [{}] {}", current, key));
      if (!sections_[current].emplace(key, Entry{value, line_no}).second)
        fail(line_no, fmt::format("duplicate key [{}] {}", current, key));
    }
  }

  [[noreturn]] void fail(std::size_t line, const std::string& msg) const {
    throw ConfigError(fmt::format("{}:{}: {}", source_, line, msg));
  }
  [[noreturn]] void fail_missing(const std::string& sec, const std::string& key) const {
    throw ConfigError(fmt::format("{}: missing required key [{}] {}", source_, sec, key));
  }

  const Entry* get(const std::string& sec, const std::string& key) const {
    const auto s = sections_.find(sec);
    if (s == sections_.end()) return nullptr;
    const auto e = s->second.find(key);
    return e == s->second.end() ? nullptr : &e->second;
  }
  bool has_section(const std::string& sec) const { return sections_.count(sec) > 0; }

  double number(const Entry& e, const std::string& key) const {
    char* end = nullptr;
    const double v = std::strtod(e.value.c_str(), &end);
    if (end != e.value.c_str() + e.value.size() || !std::isfinite(v))
      fail(e.line, fmt::format("{} must be a finite number, got '{}'", key, e.value));
    return v;
  }

  std::optional<double> opt_number(const std::string& sec, const std::string& key) const {
    const Entry* e = get(sec, key);
    if (!e) return std::nullopt;
    return number(*e, key);
  }

  double required_number(const std::string& sec, const std::string& key) const {
    const Entry* e = get(sec, key);
    if (!e) fail_missing(sec, key);
    return number(*e, key);
  }

  std::uint64_t unsigned_value(const Entry& e, const std::string& key, bool positive) const {
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(e.value.c_str(), &end, 10);
    if (e.value.empty() || e.value[0] == '-' || end != e.value.c_str() + e.value.size() || errno == ERANGE)
      fail(e.line, fmt::format("{} must be a nonnegative integer, got '{}'", key, e.value));
    if (positive && v == 0) fail(e.line, fmt::format("{} must be >= 1", key));
    return v;
  }

  std::vector<std::string> list(const Entry& e) const {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= e.value.size()) {
      const auto comma = e.value.find(',', start);
      const std::string item = trim(e.value.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (item.empty()) fail(e.line, "empty item in list");
      out.push_back(item);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return out;
  }

  std::vector<double> number_list(const Entry& e, const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : list(e)) out.push_back(number(Entry{item, e.line}, key));
    return out;
  }

  std::string path(const Entry& e) const {
    const std::filesystem::path p(e.value);
    return p.is_absolute() ? p.string() : (std::filesystem::path(base_dir_) / p).string();
  }

  const std::string& source() const { return source_; }

 private:
  std::string source_;
  std::string base_dir_;
  std::map<std::string, Section> sections_;
  std::set<std::string> seen_sections_;
};

DemandDistribution parse_distribution(const Parsed& ps) {
  const Entry* kind = ps.get("distribution", "kind");
  if (!kind) ps.fail_missing("distribution", "kind");
  auto reject_others = [&](std::set<std::string> allowed) {
    allowed.insert("kind");
    for (const auto& key : schema().at("distribution")) {
      const Entry* e = ps.get("distribution", key);
      if (e && !allowed.count(key))
        ps.fail(e->line, fmt::format("key '{}' does not apply to distribution kind '{}'", key, kind->value));
    }
  };
  DemandDistribution dist;
  if (kind->value == "uniform") {
    reject_others({"lo", "hi"});
    dist = Uniform{ps.opt_number("distribution", "lo").value_or(0.0),
                   ps.opt_number("distribution", "hi").value_or(1.0)};
  } else if (kind->value == "lognormal") {
    reject_others({"log_mean", "log_std"});
    dist = Lognormal{ps.required_number("distribution", "log_mean"),
                     ps.required_number("distribution", "log_std")};
  } else if (kind->value == "beta") {
    reject_others({"alpha", "beta"});
    dist = Beta{ps.required_number("distribution", "alpha"), ps.required_number("distribution", "beta")};
  } else if (kind->value == "empirical") {
    reject_others({"file"});
    const Entry* f = ps.get("distribution", "file");
    if (!f) ps.fail_missing("distribution", "file");
    std::ifstream in(ps.path(*f));
    if (!in) ps.fail(f->line, fmt::format("cannot open sample file '{}'", ps.path(*f)));
    try {
      dist = Empirical{read_samples(in)};
    } catch (const std::exception& e) {
      ps.fail(f->line, fmt::format("{}: {}", ps.path(*f), e.what()));
    }
  } else {
    ps.fail(kind->line, fmt::format("unknown distribution kind '{}' (uniform, lognormal, beta, empirical)", kind->value));
  }
  try {
    validate(dist);
  } catch (const std::exception& e) {
    ps.fail(kind->line, e.what());
  }
  return dist;
}

}  // namespace

std::vector<double> default_delta_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 17; ++i) grid.push_back(0.02 * i);
  return grid;
}

RunConfig parse_config(std::istream& in, const std::string& source, const std::string& base_dir) {
  Parsed ps(source, base_dir);
  ps.read(in);
  RunConfig cfg;

  cfg.p = ps.required_number("model", "p");
  cfg.c = ps.required_number("model", "c");
  cfg.c_m = ps.required_number("model", "c_m");
  const Entry* delta = ps.get("model", "delta");
  const Entry* grid = ps.get("model", "delta_grid");
  if (delta && grid) ps.fail(grid->line, "give either delta or delta_grid, not both");
  if (delta) {
    cfg.delta_grid = {ps.number(*delta, "delta")};
  } else if (grid) {
    cfg.delta_grid = ps.number_list(*grid, "delta_grid");
    cfg.delta_is_grid = true;
  } else {
    cfg.delta_grid = default_delta_grid();
    cfg.delta_is_grid = true;
  }

  for (const char* end : {"lo", "hi"}) {
    const Entry* e = ps.get("support", end);
    if (e && e->value != "auto") (std::string(end) == "lo" ? cfg.support.lo : cfg.support.hi) = ps.number(*e, end);
  }
  if (auto v = ps.opt_number("support", "cap_factor")) cfg.support.cap.cap_factor = *v;
  if (auto v = ps.opt_number("support", "cap_floor")) cfg.support.cap.cap_floor = *v;

  if (ps.has_section("distribution")) cfg.distribution = parse_distribution(ps);

  const auto mean = ps.opt_number("data", "mean");
  const auto mad = ps.opt_number("data", "mad");
  if (mean.has_value() != mad.has_value())
    throw ConfigError(fmt::format("{}: [data] mean and mad must be given together", ps.source()));
  if (mean) cfg.moments = MomentSummary{*mean, *mad};
  if (const Entry* f = ps.get("data", "samples_file")) cfg.samples_file = ps.path(*f);

  if (const Entry* e = ps.get("methods", "list")) {
    cfg.methods.clear();
    for (const auto& name : ps.list(*e)) {
      const auto m = parse_method(name);
      if (!m) ps.fail(e->line, fmt::format("unknown method '{}' (mad, wasserstein, saa, benchmark, nqr)", name));
      cfg.methods.push_back(*m);
    }
  }

  const Entry* cw = ps.get("wasserstein", "C");
  const Entry* ew = ps.get("wasserstein", "epsilon");
  if (cw && ew) ps.fail(ew->line, "give either C or epsilon, not both");
  if (cw) cfg.wasserstein_C = ps.number(*cw, "C");
  if (ew) cfg.wasserstein_epsilon = ps.number(*ew, "epsilon");

  const Entry* tau = ps.get("wtc", "tau");
  const Entry* tau_grid = ps.get("wtc", "tau_grid");
  if (tau && tau_grid) ps.fail(tau_grid->line, "give either tau or tau_grid, not both");
  if (tau) cfg.tau_grid = {ps.number(*tau, "tau")};
  if (tau_grid) cfg.tau_grid = ps.number_list(*tau_grid, "tau_grid");
  for (double t : cfg.tau_grid)
    if (t < 0.0) ps.fail((tau ? tau : tau_grid)->line, fmt::format("tau must be >= 0, got {}", t));

  if (const Entry* e = ps.get("experiment", "n_in")) cfg.n_in = ps.unsigned_value(*e, "n_in", true);
  if (const Entry* e = ps.get("experiment", "n_eval")) cfg.n_eval = ps.unsigned_value(*e, "n_eval", true);
  if (const Entry* e = ps.get("experiment", "n_trials")) cfg.n_trials = ps.unsigned_value(*e, "n_trials", true);
  if (const Entry* e = ps.get("experiment", "base_seed")) cfg.base_seed = ps.unsigned_value(*e, "base_seed", false);
  if (const Entry* e = ps.get("experiment", "n_in_grid"))
    for (const auto& item : ps.list(*e)) cfg.n_in_grid.push_back(ps.unsigned_value(Entry{item, e->line}, "n_in_grid", true));

  if (const Entry* e = ps.get("benchmark", "fit")) {
    if (e->value == "fixed_unit") cfg.benchmark_fit = BenchmarkFit::fixed_unit;
    else if (e->value == "sample_range") cfg.benchmark_fit = BenchmarkFit::sample_range;
    else ps.fail(e->line, fmt::format("benchmark fit must be fixed_unit or sample_range, got '{}'", e->value));
  }

  if (const Entry* e = ps.get("output", "dir")) cfg.output_dir = ps.path(*e);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("{}: cannot open config file", path));
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config(in, path, dir.empty() ? "." : dir.string());
}

TrialConfig to_trial_config(const RunConfig& config, std::size_t n_in) {
  if (!config.distribution) throw ConfigError("experiment needs a [distribution] section");
  TrialConfig t;
  t.n_in = n_in;
  t.n_eval = config.n_eval;
  t.n_trials = config.n_trials;
  t.base_seed = config.base_seed;
  t.true_dist = *config.distribution;
  t.methods = config.methods;
  t.delta_grid = config.delta_grid;
  t.tau_grid = config.tau_grid;
  t.wasserstein_C = config.wasserstein_C;
  t.wasserstein_epsilon = config.wasserstein_epsilon;
  t.support = config.support;
  t.benchmark_fit = config.benchmark_fit;
  return t;
}

}  // namespace qrdro
