#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "qrdro/kernels/kernels.hpp"

namespace qrdro::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(QRDRO_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa detect() {
  if (const char* env = std::getenv("QRDRO_KERNEL_ISA")) {
    const std::string v(env);
    if (v == "scalar") return Isa::scalar;
    if (v == "avx2" && cpu_has_avx2()) return Isa::avx2;
  }
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& selected() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

bool use_avx2() { return selected().load(std::memory_order_relaxed) == Isa::avx2; }

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) { return isa == Isa::scalar || cpu_has_avx2(); }

Isa active_isa() { return selected().load(); }

void force_isa(Isa isa) {
  if (!isa_available(isa))
    throw std::invalid_argument("kernel ISA not available: " + std::string(isa_name(isa)));
  selected().store(isa);
}

double profit_sum(const ProfitCoefficients& coef, std::span<const double> y) {
  return use_avx2() ? avx2::profit_sum(coef, y) : scalar::profit_sum(coef, y);
}

WasteSums waste_fulfilled_sums(double one_minus_p, double x, std::span<const double> y) {
  return use_avx2() ? avx2::waste_fulfilled_sums(one_minus_p, x, y)
                    : scalar::waste_fulfilled_sums(one_minus_p, x, y);
}

double wtc_integrand_sum(double one_minus_p, double x, double tau, std::span<const double> y) {
  return use_avx2() ? avx2::wtc_integrand_sum(one_minus_p, x, tau, y)
                    : scalar::wtc_integrand_sum(one_minus_p, x, tau, y);
}

double dual_infimum_sum(const DualPieces& pieces, double lambda, std::span<const double> y,
                        std::span<double> per_sample) {
  return use_avx2() ? avx2::dual_infimum_sum(pieces, lambda, y, per_sample)
                    : scalar::dual_infimum_sum(pieces, lambda, y, per_sample);
}

double wtc_sup_sum(const WtcSupTerms& terms, double alpha, std::span<const double> y,
                   std::span<double> per_sample) {
  return use_avx2() ? avx2::wtc_sup_sum(terms, alpha, y, per_sample)
                    : scalar::wtc_sup_sum(terms, alpha, y, per_sample);
}

double canonical_sum(std::span<const double> v) {
  return use_avx2() ? avx2::canonical_sum(v) : scalar::canonical_sum(v);
}

#if !defined(QRDRO_HAVE_AVX2)
// Without an AVX2 build these are never selected; isa_available() reports false.
namespace avx2 {
namespace {
[[noreturn]] void unavailable() { throw std::logic_error("AVX2 kernels not built"); }
}  // namespace
double profit_sum(const ProfitCoefficients&, std::span<const double>) { unavailable(); }
WasteSums waste_fulfilled_sums(double, double, std::span<const double>) { unavailable(); }
double wtc_integrand_sum(double, double, double, std::span<const double>) { unavailable(); }
double dual_infimum_sum(const DualPieces&, double, std::span<const double>, std::span<double>) {
  unavailable();
}
double wtc_sup_sum(const WtcSupTerms&, double, std::span<const double>, std::span<double>) {
  unavailable();
}
double canonical_sum(std::span<const double>) { unavailable(); }
}  // namespace avx2
#endif

}  // namespace qrdro::kernels
