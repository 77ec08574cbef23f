#include "noisescope/spin_dynamics.hpp"

#include <cmath>
#include <numbers>

#include "noisescope/errors.hpp"

namespace noisescope {

Protocol Protocol::free_evolution(double omega) {
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw ConfigError("free evolution requires a Larmor frequency omega > 0");
  }
  return Protocol{ProtocolKind::FreeEvolution, omega};
}

MeasurementAxis MeasurementAxis::x_axis() { return MeasurementAxis{std::numbers::pi / 2.0, 0.0}; }

Eigen::Vector3d MeasurementAxis::unit_vector() const {
  return {std::sin(theta) * std::cos(varphi), std::sin(theta) * std::sin(varphi), std::cos(theta)};
}

MeasurementAxis MeasurementAxis::antipodal() const {
  return MeasurementAxis{std::numbers::pi - theta, varphi + std::numbers::pi};
}

BlochState final_bloch(const Protocol& protocol, double initial_theta, double chi, double tau) {
  const double transverse = std::exp(-chi) * std::sin(initial_theta);
  BlochState state;
  if (protocol.is_echo()) {
    state.n = {transverse, 0.0, std::cos(initial_theta)};
  } else {
    const double phase = protocol.omega * tau;
    state.n = {transverse * std::cos(phase), transverse * std::sin(phase), std::cos(initial_theta)};
  }
  return state;
}

OutcomeDistribution outcome_probs(const Protocol& protocol, double initial_theta, double chi,
                                  double tau, const MeasurementAxis& axis) {
  const double projection = final_bloch(protocol, initial_theta, chi, tau).n.dot(axis.unit_vector());
  const double p_plus = 0.5 * (1.0 + projection);
  return OutcomeDistribution{p_plus, 0.5 * (1.0 - projection)};
}

double signal_contrast(const Protocol& protocol, double tau) {
  return protocol.is_echo() ? 1.0 : std::cos(protocol.omega * tau);
}

OutcomeDistribution dephasing_outcome_probs(const Protocol& protocol, double tau, double t_phi) {
  const double signal = signal_contrast(protocol, tau) * std::exp(-tau / t_phi);
  return OutcomeDistribution{0.5 * (1.0 + signal), 0.5 * (1.0 - signal)};
}

int sample_outcome(const OutcomeDistribution& dist, RandomStream& rng) {
  return rng.uniform() < dist.p_plus ? +1 : -1;
}

}  // namespace noisescope
