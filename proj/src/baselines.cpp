#include "qrdro/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

#include "qrdro/kernels/kernels.hpp"
#include "qrdro/search.hpp"

namespace qrdro {

namespace {

constexpr double kTieTol = 1e-12;

// M(t) = (1/N) sum_i min{d_i, t} over sorted demands, via prefix sums.
class TruncatedMean {
 public:
  explicit TruncatedMean(std::vector<double> sorted) : d_(std::move(sorted)), prefix_(d_.size() + 1) {
    for (std::size_t i = 0; i < d_.size(); ++i) prefix_[i + 1] = prefix_[i] + d_[i];
  }

  double operator()(double t) const {
    const auto below = static_cast<std::size_t>(std::lower_bound(d_.begin(), d_.end(), t) - d_.begin());
    const double n = static_cast<double>(d_.size());
    return (prefix_[below] + t * static_cast<double>(d_.size() - below)) / n;
  }

 private:
  std::vector<double> d_;
  std::vector<double> prefix_;
};

double empirical_mean_profit(const ModelParams& params, const Policy& policy,
                             std::span<const double> y) {
  return kernels::profit_sum(profit_coefficients(params, policy), y) / static_cast<double>(y.size());
}

}  // namespace

std::string_view baseline_tag_name(BaselineTag tag) {
  switch (tag) {
    case BaselineTag::saa: return "saa";
    case BaselineTag::uniform_benchmark: return "benchmark";
    case BaselineTag::nqr_saa: return "nqr";
  }
  return "unknown";
}

BaselineResult saa_solve(const ModelParams& params, const SampleSet& samples, bool restrict_equal) {
  if (samples.values.empty()) throw std::invalid_argument("SAA needs at least one sample");
  const double lo = params.box_lo();
  const double hi = params.box_hi();

  std::vector<double> d;
  d.reserve(samples.size());
  for (double y : samples.values) d.push_back(demand(params, y));
  std::sort(d.begin(), d.end());

  std::vector<double> cand{lo, hi};
  for (double v : d) cand.push_back(std::clamp(v, lo, hi));
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  // E Pi = F(x) + G(q) with F(x) = (p - c - delta) M(x) - c_m x, G(q) = (c + delta) M(q) - c q.
  const TruncatedMean M(d);
  const double margin = params.p() - params.c() - params.delta();
  const double qr_cost = params.c() + params.delta();
  auto F = [&](double x) { return margin * M(x) - params.c_m() * x; };
  auto G = [&](double q) { return qr_cost * M(q) - params.c() * q; };

  Policy best{lo, lo};
  double best_value = -std::numeric_limits<double>::infinity();
  double best_q = lo;
  double best_g = -std::numeric_limits<double>::infinity();
  for (double x : cand) {
    double q = x;
    if (restrict_equal) {
      best_g = G(x);
    } else {
      const double g = G(x);
      if (g > best_g + kTieTol) {
        best_g = g;
        best_q = x;
      }
      q = best_q;
    }
    const double v = F(x) + best_g;
    if (v > best_value + kTieTol) {
      best_value = v;
      best = {x, q};
    }
  }
  return {best, empirical_mean_profit(params, best, samples.view()),
          restrict_equal ? BaselineTag::nqr_saa : BaselineTag::saa};
}

BaselineResult nqr_solve(const ModelParams& params, const SampleSet& samples) {
  return saa_solve(params, samples, true);
}

double uniform_expected_profit(const ModelParams& params, const Policy& policy,
                               const Uniform& dist) {
  validate(DemandDistribution{dist});
  const double a = params.one_minus_p() * dist.lo;
  const double b = params.one_minus_p() * dist.hi;
  auto M = [&](double t) {
    if (t <= a) return t;
    if (t >= b) return 0.5 * (a + b);
    return (0.5 * (t * t - a * a) + t * (b - t)) / (b - a);
  };
  const double margin = params.p() - params.c() - params.delta();
  return margin * M(policy.x) + (params.c() + params.delta()) * M(policy.q) -
         params.c_m() * policy.x - params.c() * policy.q;
}

double benchmark_objective_variant(const ModelParams& params, const Policy& policy) {
  const double p = params.p();
  const double x = policy.x;
  const double q = policy.q;
  const double two_omp = 2.0 * (1.0 - p);
  return p * x * (2.0 - 2.0 * p - x) / two_omp - params.c_m() * x - params.c() * q -
         (params.c() + params.delta()) * (x - q) * (2.0 - 2.0 * p + q - x) / two_omp;
}

BaselineResult uniform_benchmark_solve(const ModelParams& params, BenchmarkFit fit,
                                       const SampleSet* samples) {
  Uniform assumed{0.0, 1.0};
  if (fit == BenchmarkFit::sample_range) {
    if (samples == nullptr || samples->values.empty())
      throw std::invalid_argument("fitting the benchmark's uniform range needs in-sample data");
    const auto [mn, mx] = std::minmax_element(samples->values.begin(), samples->values.end());
    if (!(*mn < *mx))
      throw std::invalid_argument("fitting the benchmark's uniform range needs two distinct samples");
    assumed = {*mn, *mx};
  }
  const double lo = params.one_minus_p() * assumed.lo;
  const double hi = params.one_minus_p() * assumed.hi;
  const auto best = search::maximize_on_triangle(
      [&](double x, double q) { return uniform_expected_profit(params, {x, q}, assumed); }, lo, hi,
      1e-10 * (hi - lo));
  const Policy policy{best.x, best.q};
  return {policy, uniform_expected_profit(params, policy, assumed), BaselineTag::uniform_benchmark};
}

}  // namespace qrdro
