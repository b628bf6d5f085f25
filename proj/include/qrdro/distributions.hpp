#pragma once

// Demand distributions, seeded sampling and moment estimation.
//
// Randomness: every sample set is drawn from std::mt19937_64 (whose output
// sequence is fixed by the C++ standard) seeded with one 64-bit value, and the
// variates are produced by Boost.Random's portable distribution code. Trial
// substreams derive their seeds with SplitMix64 mixing of (base, index, tag),
// so a trial's data does not depend on which thread generates it.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace qrdro {

struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
};

/// Y = exp(log_mean + log_std Z), Z standard normal.
struct Lognormal {
  double log_mean = 0.0;
  double log_std = 1.0;
};

struct Beta {
  double alpha = 1.0;
  double beta = 1.0;
};

/// Resampling (with replacement) from recorded market sizes.
struct Empirical {
  std::vector<double> samples;
};

using DemandDistribution = std::variant<Uniform, Lognormal, Beta, Empirical>;

/// Throws std::invalid_argument when the parameters violate the family's invariants.
void validate(const DemandDistribution& dist);

/// Short stable label, e.g. "uniform(0,1)", "lognormal(-0.84,0.54)", "beta(2,5)".
std::string describe(const DemandDistribution& dist);

/// True when the family has a finite upper end of support.
bool has_bounded_support(const DemandDistribution& dist);

struct SampleSet {
  std::vector<double> values;
  std::uint64_t seed = 0;

  std::span<const double> view() const { return values; }
  std::size_t size() const { return values.size(); }
};

struct MomentSummary {
  double mean = 0.0;
  double mad = 0.0;
};

/// n i.i.d. draws; a pure function of (dist, n, seed). Requires n >= 1.
SampleSet sample(const DemandDistribution& dist, std::size_t n, std::uint64_t seed);

/// Arithmetic mean and mean absolute deviation about it. Throws on empty input.
MomentSummary estimate_moments(std::span<const double> values);
inline MomentSummary estimate_moments(const SampleSet& s) { return estimate_moments(s.view()); }

/// Exact moments: closed form for Uniform and Empirical, adaptive quadrature otherwise.
MomentSummary true_moments(const DemandDistribution& dist);

/// Seed for substream `index` under `tag`, derived from `base` by SplitMix64 mixing.
std::uint64_t substream_seed(std::uint64_t base, std::uint64_t index, std::uint64_t tag);

/// Upper support bound for ambiguity sets when the truth is unbounded:
/// max(cap_factor * max(samples), cap_floor).
struct SupportCapRule {
  double cap_factor = 3.0;
  double cap_floor = 1.0;
};
double capped_support_hi(std::span<const double> samples, const SupportCapRule& rule = {});

/// One decimal value per line; blank lines and lines starting with '#' are skipped.
/// Throws std::runtime_error with the offending line number on malformed or negative input.
std::vector<double> read_samples(std::istream& in);
void write_samples(std::ostream& out, std::span<const double> values);

}  // namespace qrdro
