#include "noisescope/noise_model.hpp"

#include <cmath>
#include <string>

#include "noisescope/errors.hpp"

namespace noisescope {
namespace {

// Below this x the closed forms lose digits to cancellation; both series
// converge to full double precision well before kSeriesTerms.
constexpr double kSeriesCutoff = 1.0;
constexpr int kSeriesTerms = 24;

// (x + e^{-x} - 1) / x^2 = sum_{n>=2} (-x)^{n-2} / n!
double decay_excess_scaled(double x) {
  double term = 0.5;  // n = 2
  double sum = term;
  for (int n = 3; n < kSeriesTerms; ++n) {
    term *= -x / n;
    sum += term;
  }
  return sum;
}

// (x - 2 + e^{-x}(x + 2)) / x^2 = sum_{n>=3} (-1)^n (2 - n) x^{n-2} / n!
double g_numerator_scaled(double x) {
  double inv_fact = 1.0 / 6.0;  // 1/n! at n = 3
  double power = x;             // x^{n-2}
  double sum = 0.0;
  for (int n = 3; n < kSeriesTerms; ++n) {
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    sum += sign * (2.0 - n) * inv_fact * power;
    inv_fact /= (n + 1);
    power *= x;
  }
  return sum;
}

double decay_excess(double x) {
  if (x < kSeriesCutoff) return x * x * decay_excess_scaled(x);
  return x + std::expm1(-x);
}

double g_numerator(double x) {
  if (x < kSeriesCutoff) return x * x * g_numerator_scaled(x);
  return x - 2.0 + std::exp(-x) * (x + 2.0);
}

void require_nonnegative_time(double tau) {
  if (!(tau >= 0.0) || !std::isfinite(tau)) {
    throw DomainError("evolution time must be finite and >= 0, got " + std::to_string(tau));
  }
}

}  // namespace

OUNoiseParams OUNoiseParams::make(double amplitude, double memory_time) {
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
    throw ConfigError("noise amplitude b must be > 0");
  }
  if (!(memory_time > 0.0) || !std::isfinite(memory_time)) {
    throw ConfigError("noise memory time tau_c must be > 0");
  }
  return OUNoiseParams{amplitude, memory_time};
}

double decoherence_exponent(const OUNoiseParams& params, double tau) {
  require_nonnegative_time(tau);
  const double b = params.amplitude;
  const double tc = params.memory_time;
  return b * b * tc * tc * decay_excess(tau / tc);
}

double dephasing_time(const OUNoiseParams& params) {
  return 1.0 / (params.amplitude * params.amplitude * params.memory_time);
}

double g_function(double x) {
  if (!(x >= 0.0)) throw DomainError("g_function requires x >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < kSeriesCutoff) return g_numerator_scaled(x) / decay_excess_scaled(x);
  return g_numerator(x) / decay_excess(x);
}

double dchi_dparam(const OUNoiseParams& params, double tau, NoiseParam which) {
  require_nonnegative_time(tau);
  const double b = params.amplitude;
  const double tc = params.memory_time;
  switch (which) {
    case NoiseParam::Amplitude:
      return 2.0 * decoherence_exponent(params, tau) / b;
    case NoiseParam::MemoryTime:
      // d/dtau_c of b^2 (tau_c tau + tau_c^2 (e^{-tau/tau_c} - 1)) = b^2 tau_c * numerator of g
      return b * b * tc * g_numerator(tau / tc);
  }
  return 0.0;
}

}  // namespace noisescope
