#pragma once

#include <Eigen/Core>

#include "noisescope/random.hpp"

namespace noisescope {

enum class ProtocolKind { FreeEvolution, SpinEcho };

/// Readout protocol. Free evolution keeps the Larmor precession; the spin
/// echo applies an instantaneous perfect pi-pulse at tau/2 which removes it.
struct Protocol {
  ProtocolKind kind = ProtocolKind::SpinEcho;
  double omega = 0.0;  ///< Larmor angular frequency, used by FreeEvolution only

  static Protocol spin_echo() { return Protocol{ProtocolKind::SpinEcho, 0.0}; }
  /// Throws ConfigError unless omega > 0.
  static Protocol free_evolution(double omega);

  [[nodiscard]] bool is_echo() const { return kind == ProtocolKind::SpinEcho; }
};

struct BlochState {
  Eigen::Vector3d n = Eigen::Vector3d::Zero();

  [[nodiscard]] double length() const { return n.norm(); }
};

/// Projective measurement axis (polar angle theta, azimuth varphi).
struct MeasurementAxis {
  double theta = 0.0;
  double varphi = 0.0;

  static MeasurementAxis x_axis();
  [[nodiscard]] Eigen::Vector3d unit_vector() const;
  [[nodiscard]] MeasurementAxis antipodal() const;
};

struct OutcomeDistribution {
  double p_plus = 1.0;
  double p_minus = 0.0;
};

/// Final Bloch vector for initial polar angle `initial_theta`, decoherence
/// exponent `chi` and evolution time `tau`.
BlochState final_bloch(const Protocol& protocol, double initial_theta, double chi, double tau);

/// P(+-1) = (1 +- n.m) / 2 for the final state measured along `axis`.
OutcomeDistribution outcome_probs(const Protocol& protocol, double initial_theta, double chi,
                                  double tau, const MeasurementAxis& axis);

/// Markovian dephasing exponent tau / T_phi used by the T_phi schemes.
inline double markovian_chi(double tau, double t_phi) { return tau / t_phi; }

/// Signal prefactor of the x-axis readout: 1 for the echo, cos(omega tau)
/// for free evolution.
double signal_contrast(const Protocol& protocol, double tau);

/// P(+1 | T_phi) for Theta = pi/2 and x-axis readout:
/// (1 + contrast * exp(-tau / T_phi)) / 2.
OutcomeDistribution dephasing_outcome_probs(const Protocol& protocol, double tau, double t_phi);

/// Draws +1 with probability p_plus, otherwise -1.
int sample_outcome(const OutcomeDistribution& dist, RandomStream& rng);

}  // namespace noisescope
