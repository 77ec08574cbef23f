#pragma once

#include <Eigen/Core>

#include "noisescope/noise_model.hpp"
#include "noisescope/spin_dynamics.hpp"

namespace noisescope {

enum class FisherParam { Omega, Amplitude, MemoryTime, TPhi };

/// Fisher information about one parameter, in units of 1/param^2.
struct FisherValue {
  double value = 0.0;
  FisherParam param = FisherParam::TPhi;
};

/// Quantum Fisher information of a two-level state from its Bloch vector n
/// and derivative dn:
///   F = |dn|^2 + (d|n|^2)^2 / (4 (1 - |n|^2)),
/// the second term dropped for pure states. Throws DomainError if |n| > 1.
FisherValue qfi_bloch(const Eigen::Vector3d& n, const Eigen::Vector3d& dn,
                      FisherParam param = FisherParam::TPhi);

/// Reference QFI from the spectral decomposition rho = sum_k p_k |k><k|:
///   F = sum (dp_k)^2/p_k + sum p_k F_k - sum_{m!=k} 8 p_m p_k/(p_m+p_k) |<m|dk>|^2
/// over the support of rho. Independent of qfi_bloch; used as its oracle.
/// Throws DomainError unless rho is Hermitian, unit-trace and positive.
FisherValue qfi_spectral_2level(const Eigen::Matrix2cd& rho, const Eigen::Matrix2cd& drho,
                                FisherParam param = FisherParam::TPhi);

/// Density matrix (1 + sigma.n)/2 and its derivative sigma.dn/2.
Eigen::Matrix2cd density_from_bloch(const Eigen::Vector3d& n);
Eigen::Matrix2cd density_derivative_from_bloch(const Eigen::Vector3d& dn);

/// Classical Fisher information of a binary outcome with P(+1) = p_plus:
///   F = dp^2 (1/p + 1/(1 - p)).
/// At p in {0, 1}: returns 0 if dp == 0, else throws SingularInformationError.
FisherValue cfi_binary(double p_plus, double dp_plus, FisherParam param = FisherParam::TPhi);

/// QFI about omega, b or tau_c of the free-evolution state under OU noise.
FisherValue qfi_model(FisherParam param, double initial_theta, double tau,
                      const OUNoiseParams& noise, double omega);

/// CFI of a projective measurement along `axis` on the same state.
FisherValue cfi_model(FisherParam param, double initial_theta, double tau,
                      const MeasurementAxis& axis, const OUNoiseParams& noise, double omega);

/// QFI about T_phi for Markovian dephasing (same for both protocols):
/// tau^2 / T^4 / (exp(2 tau/T) - 1).
double qfi_tphi(double tau, double t_phi);

/// CFI about T_phi of the x-axis readout. Echo: equal to qfi_tphi.
/// Free evolution: tau^2/T^4 cos^2(omega tau) / (exp(2 tau/T) - cos^2(omega tau)).
FisherValue cfi_tphi(const Protocol& protocol, double tau, double t_phi);

/// Evolution time used by the CFI-based rule: 0.8 T_est for the echo, the
/// multiple n pi/omega (n >= 1) closest to 0.8 T_est for free evolution.
double optimal_tau(const Protocol& protocol, double t_est);

/// Rounded optimum factor used by the adaptive rules.
inline constexpr double kOptimalTauFactor = 0.8;

/// Exact argmax of x^2/(exp(2x)-1), the root of 1 - exp(-2x) = x (~0.7968).
double exact_optimal_tau_factor();

struct Peak {
  double tau = 0.0;
  double value = 0.0;
};

/// Maximum of cfi_tphi over tau in [lo, hi]. Smooth curves use a bracketed
/// Brent search; free evolution is searched on the n pi/omega lattice.
Peak maximize_cfi_tphi(const Protocol& protocol, double t_phi, double lo, double hi);

}  // namespace noisescope
