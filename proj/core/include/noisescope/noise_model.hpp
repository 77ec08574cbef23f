#pragma once

namespace noisescope {

/// Ornstein-Uhlenbeck magnetic noise with autocorrelation
/// <w(t) w(t')> = b^2 exp(-|t - t'| / tau_c).
struct OUNoiseParams {
  double amplitude;    ///< b, angular frequency
  double memory_time;  ///< tau_c

  /// Validating constructor; throws ConfigError unless both are positive and finite.
  static OUNoiseParams make(double amplitude, double memory_time);
};

enum class NoiseParam { Amplitude, MemoryTime };

/// Decoherence exponent chi(tau) = b^2 tau_c^2 (tau/tau_c + exp(-tau/tau_c) - 1).
/// Throws DomainError for tau < 0.
double decoherence_exponent(const OUNoiseParams& params, double tau);

/// Dephasing time T_phi = 1 / (b^2 tau_c).
double dephasing_time(const OUNoiseParams& params);

/// g(x) = [x - 2 + exp(-x)(x + 2)] / [x + exp(-x) - 1]; rises from x/3 near
/// zero to 1 for large x. Throws DomainError for x < 0.
double g_function(double x);

/// Partial derivative of chi with respect to b or tau_c.
double dchi_dparam(const OUNoiseParams& params, double tau, NoiseParam which);

}  // namespace noisescope
