#include "qrdro/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/random/beta_distribution.hpp>
#include <boost/random/lognormal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>
#include <fmt/format.h>

namespace qrdro {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void fail(const std::string& msg) { throw std::invalid_argument("invalid distribution: " + msg); }

// Adaptive Gauss-Kronrod; tolerance well below the 1e-8 target.
template <class F>
double integrate(F f, double a, double b) {
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-12, &err);
}

template <class Dist>
MomentSummary quadrature_moments(const Dist& d, double lo, double hi) {
  using boost::math::pdf;
  const double mean = integrate([&](double y) { return y * pdf(d, y); }, lo, hi);
  const double below = integrate([&](double y) { return (mean - y) * pdf(d, y); }, lo, mean);
  const double above = integrate([&](double y) { return (y - mean) * pdf(d, y); }, mean, hi);
  return {mean, below + above};
}

}  // namespace

void validate(const DemandDistribution& dist) {
  std::visit(overloaded{
                 [](const Uniform& u) {
                   if (!(std::isfinite(u.lo) && std::isfinite(u.hi) && u.lo < u.hi))
                     fail("uniform requires lo < hi");
                   if (u.lo < 0.0) fail("uniform requires lo >= 0 (market sizes are nonnegative)");
                 },
                 [](const Lognormal& l) {
                   if (!std::isfinite(l.log_mean)) fail("lognormal log_mean must be finite");
                   if (!(l.log_std > 0.0 && std::isfinite(l.log_std)))
                     fail("lognormal requires log_std > 0");
                 },
                 [](const Beta& b) {
                   if (!(b.alpha > 0.0 && b.beta > 0.0 && std::isfinite(b.alpha) &&
                         std::isfinite(b.beta)))
                     fail("beta requires alpha > 0 and beta > 0");
                 },
                 [](const Empirical& e) {
                   if (e.samples.empty()) fail("empirical requires at least one sample");
                   for (double v : e.samples)
                     if (!(v >= 0.0 && std::isfinite(v)))
                       fail(fmt::format("empirical sample {} is negative or not finite", v));
                 },
             },
             dist);
}

std::string describe(const DemandDistribution& dist) {
  return std::visit(
      overloaded{
          [](const Uniform& u) { return fmt::format("uniform({},{})", u.lo, u.hi); },
          [](const Lognormal& l) {
            return fmt::format("lognormal({},{})", l.log_mean, l.log_std);
          },
          [](const Beta& b) { return fmt::format("beta({},{})", b.alpha, b.beta); },
          [](const Empirical& e) { return fmt::format("empirical(n={})", e.samples.size()); },
      },
      dist);
}

bool has_bounded_support(const DemandDistribution& dist) {
  return !std::holds_alternative<Lognormal>(dist);
}

SampleSet sample(const DemandDistribution& dist, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample count must be >= 1");
  validate(dist);
  std::mt19937_64 engine(seed);
  SampleSet out;
  out.seed = seed;
  out.values.reserve(n);
  std::visit(overloaded{
                 [&](const Uniform& u) {
                   boost::random::uniform_real_distribution<double> g(u.lo, u.hi);
                   for (std::size_t i = 0; i < n; ++i) out.values.push_back(g(engine));
                 },
                 [&](const Lognormal& l) {
                   boost::random::lognormal_distribution<double> g(l.log_mean, l.log_std);
                   for (std::size_t i = 0; i < n; ++i) out.values.push_back(g(engine));
                 },
                 [&](const Beta& b) {
                   boost::random::beta_distribution<double> g(b.alpha, b.beta);
                   for (std::size_t i = 0; i < n; ++i) out.values.push_back(g(engine));
                 },
                 [&](const Empirical& e) {
                   boost::random::uniform_int_distribution<std::size_t> g(0, e.samples.size() - 1);
                   for (std::size_t i = 0; i < n; ++i) out.values.push_back(e.samples[g(engine)]);
                 },
             },
             dist);
  return out;
}

MomentSummary estimate_moments(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("cannot estimate moments of an empty sample set");
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double dev = 0.0;
  for (double v : values) dev += std::abs(v - mean);
  return {mean, dev / static_cast<double>(values.size())};
}

MomentSummary true_moments(const DemandDistribution& dist) {
  validate(dist);
  return std::visit(
      overloaded{
          [](const Uniform& u) {
            return MomentSummary{0.5 * (u.lo + u.hi), 0.25 * (u.hi - u.lo)};
          },
          [](const Lognormal& l) {
            boost::math::lognormal_distribution<double> d(l.log_mean, l.log_std);
            return quadrature_moments(d, 0.0, std::numeric_limits<double>::infinity());
          },
          [](const Beta& b) {
            boost::math::beta_distribution<double> d(b.alpha, b.beta);
            return quadrature_moments(d, 0.0, 1.0);
          },
          [](const Empirical& e) { return estimate_moments(e.samples); },
      },
      dist);
}

std::uint64_t substream_seed(std::uint64_t base, std::uint64_t index, std::uint64_t tag) {
  std::uint64_t h = splitmix64(base);
  h = splitmix64(h ^ index);
  return splitmix64(h ^ (tag * 0xD1B54A32D192ED03ULL));
}

double capped_support_hi(std::span<const double> samples, const SupportCapRule& rule) {
  if (samples.empty()) throw std::invalid_argument("support cap needs at least one sample");
  const double largest = *std::max_element(samples.begin(), samples.end());
  return std::max(rule.cap_factor * largest, rule.cap_floor);
}

std::vector<double> read_samples(std::istream& in) {
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string token = line.substr(first, last - first + 1);
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size() || !std::isfinite(v))
      throw std::runtime_error(fmt::format("line {}: not a decimal value: '{}'", lineno, token));
    if (v < 0.0)
      throw std::runtime_error(fmt::format("line {}: market size must be >= 0, got {}", lineno, v));
    out.push_back(v);
  }
  return out;
}

void write_samples(std::ostream& out, std::span<const double> values) {
  for (double v : values) out << fmt::format("{:.17g}\n", v);
}

}  // namespace qrdro
