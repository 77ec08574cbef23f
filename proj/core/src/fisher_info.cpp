#include "noisescope/fisher_info.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "noisescope/errors.hpp"

namespace noisescope {
namespace {

constexpr double kPurityTolerance = 1e-12;
constexpr double kBlochOvershoot = 1e-9;
constexpr double kSupportCutoff = 1e-14;
constexpr double kDegenerateGap = 1e-10;

using cd = std::complex<double>;

const Eigen::Matrix2cd& pauli(int k) {
  static const Eigen::Matrix2cd sx = (Eigen::Matrix2cd() << 0, 1, 1, 0).finished();
  static const Eigen::Matrix2cd sy = (Eigen::Matrix2cd() << 0, cd(0, -1), cd(0, 1), 0).finished();
  static const Eigen::Matrix2cd sz = (Eigen::Matrix2cd() << 1, 0, 0, -1).finished();
  return k == 0 ? sx : (k == 1 ? sy : sz);
}

Eigen::Matrix2cd pauli_combination(const Eigen::Vector3d& v) {
  return v.x() * pauli(0) + v.y() * pauli(1) + v.z() * pauli(2);
}

void require_hermitian(const Eigen::Matrix2cd& m, const char* what) {
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
    throw DomainError(std::string(what) + " is not Hermitian");
  }
}

}  // namespace

FisherValue qfi_bloch(const Eigen::Vector3d& n, const Eigen::Vector3d& dn, FisherParam param) {
  const double n2 = n.squaredNorm();
  if (std::sqrt(n2) > 1.0 + kBlochOvershoot) {
    throw DomainError("Bloch vector longer than 1");
  }
  double value = dn.squaredNorm();
  if (n2 < 1.0 - kPurityTolerance) {
    // (d|n|^2)^2 / (4 (1 - |n|^2)) with d|n|^2 = 2 n.dn
    const double radial = n.dot(dn);
    value += radial * radial / (1.0 - n2);
  }
  return FisherValue{value, param};
}

Eigen::Matrix2cd density_from_bloch(const Eigen::Vector3d& n) {
  return 0.5 * (Eigen::Matrix2cd::Identity() + pauli_combination(n));
}

Eigen::Matrix2cd density_derivative_from_bloch(const Eigen::Vector3d& dn) {
  return 0.5 * pauli_combination(dn);
}

FisherValue qfi_spectral_2level(const Eigen::Matrix2cd& rho, const Eigen::Matrix2cd& drho,
                                FisherParam param) {
  require_hermitian(rho, "rho");
  require_hermitian(drho, "drho");
  if (std::abs(rho.trace() - cd(1.0, 0.0)) > 1e-10) {
    throw DomainError("rho must have unit trace");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> solver(rho);
  Eigen::Vector2d p = solver.eigenvalues();
  if (p.minCoeff() < -1e-12) throw DomainError("rho is not positive semidefinite");

  Eigen::Matrix2cd basis = solver.eigenvectors();
  if (std::abs(p(1) - p(0)) < kDegenerateGap) {
    // Any basis diagonalises rho; the one diagonalising drho removes the
    // eigenvector-derivative terms, which cancel exactly in this case.
    basis = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd>(drho).eigenvectors();
  }
  const Eigen::Matrix2cd d = basis.adjoint() * drho * basis;  // <m| drho |k>

  double population_term = 0.0;
  double pure_term = 0.0;
  double cross_term = 0.0;
  for (int k = 0; k < 2; ++k) {
    if (p(k) <= kSupportCutoff) continue;
    const double dp = d(k, k).real();
    population_term += dp * dp / p(k);

    // F_k = 4 sum_{m != k} |<m|dk>|^2, with <m|dk> = <m|drho|k> / (p_k - p_m)
    const int m = 1 - k;
    const double gap = p(k) - p(m);
    const double overlap2 = std::abs(gap) < kDegenerateGap ? 0.0 : std::norm(d(m, k)) / (gap * gap);
    pure_term += p(k) * 4.0 * overlap2;
    if (p(m) > kSupportCutoff) {
      cross_term += 8.0 * p(m) * p(k) / (p(m) + p(k)) * overlap2;
    }
  }
  return FisherValue{population_term + pure_term - cross_term, param};
}

FisherValue cfi_binary(double p_plus, double dp_plus, FisherParam param) {
  if (!(p_plus >= 0.0 && p_plus <= 1.0)) throw DomainError("probability outside [0, 1]");
  if (p_plus == 0.0 || p_plus == 1.0) {
    if (dp_plus == 0.0) return FisherValue{0.0, param};
    throw SingularInformationError("certain outcome with parameter-dependent probability");
  }
  return FisherValue{dp_plus * dp_plus * (1.0 / p_plus + 1.0 / (1.0 - p_plus)), param};
}

FisherValue qfi_model(FisherParam param, double initial_theta, double tau,
                      const OUNoiseParams& noise, double omega) {
  (void)omega;  // the QFI does not depend on the precession phase
  const double sin_theta = std::sin(initial_theta);
  const double s2 = sin_theta * sin_theta;
  const double chi = decoherence_exponent(noise, tau);
  switch (param) {
    case FisherParam::Omega:
      return FisherValue{tau * tau * std::exp(-2.0 * chi) * s2, param};
    case FisherParam::Amplitude:
    case FisherParam::MemoryTime: {
      if (chi == 0.0) return FisherValue{0.0, param};
      const double dchi = dchi_dparam(
          noise, tau, param == FisherParam::Amplitude ? NoiseParam::Amplitude : NoiseParam::MemoryTime);
      return FisherValue{dchi * dchi / std::expm1(2.0 * chi) * s2, param};
    }
    case FisherParam::TPhi:
      break;
  }
  throw ConfigError("qfi_model covers omega, b and tau_c; use qfi_tphi for T_phi");
}

FisherValue cfi_model(FisherParam param, double initial_theta, double tau,
                      const MeasurementAxis& axis, const OUNoiseParams& noise, double omega) {
  if (param == FisherParam::TPhi) {
    throw ConfigError("cfi_model covers omega, b and tau_c; use cfi_tphi for T_phi");
  }
  const double chi = decoherence_exponent(noise, tau);
  const double decay = std::exp(-chi);
  const double phase = omega * tau;

  const Eigen::Vector3d pure_state{std::sin(initial_theta) * std::cos(phase),
                                   std::sin(initial_theta) * std::sin(phase), std::cos(initial_theta)};
  const Eigen::Vector3d m = axis.unit_vector();
  const double transverse =
      std::sin(initial_theta) * std::sin(axis.theta) * std::cos(phase - axis.varphi);
  const double longitudinal = std::cos(initial_theta) * std::cos(axis.theta);

  double slope = 0.0;  // d(n.m)/dzeta
  if (param == FisherParam::Omega) {
    slope = tau * decay * std::sin(initial_theta) * std::sin(axis.theta) * std::sin(axis.varphi - phase);
  } else {
    const double dchi = dchi_dparam(
        noise, tau, param == FisherParam::Amplitude ? NoiseParam::Amplitude : NoiseParam::MemoryTime);
    slope = -dchi * decay * transverse;
  }

  // 1 - (n.m)^2 split into the chi = 0 part |n0 x m|^2 and the dephasing
  // correction, so that neither is formed by cancellation.
  const double denominator = pure_state.cross(m).squaredNorm() +
                             transverse * (-std::expm1(-chi)) *
                                 (transverse * (1.0 + decay) + 2.0 * longitudinal);
  if (denominator <= 0.0) {
    if (slope == 0.0) return FisherValue{0.0, param};
    throw SingularInformationError("certain outcome with parameter-dependent probability");
  }
  return FisherValue{slope * slope / denominator, param};
}

double qfi_tphi(double tau, double t_phi) {
  if (!(tau >= 0.0)) throw DomainError("evolution time must be >= 0");
  if (!(t_phi > 0.0)) throw DomainError("T_phi must be > 0");
  if (tau == 0.0) return 0.0;
  const double t2 = t_phi * t_phi;
  return tau * tau / (t2 * t2) / std::expm1(2.0 * tau / t_phi);
}

FisherValue cfi_tphi(const Protocol& protocol, double tau, double t_phi) {
  if (protocol.is_echo()) return FisherValue{qfi_tphi(tau, t_phi), FisherParam::TPhi};
  if (!(tau >= 0.0)) throw DomainError("evolution time must be >= 0");
  if (!(t_phi > 0.0)) throw DomainError("T_phi must be > 0");
  if (tau == 0.0) return FisherValue{0.0, FisherParam::TPhi};
  const double c = std::cos(protocol.omega * tau);
  const double s = std::sin(protocol.omega * tau);
  const double t2 = t_phi * t_phi;
  const double value = tau * tau / (t2 * t2) * c * c / (std::expm1(2.0 * tau / t_phi) + s * s);
  return FisherValue{value, FisherParam::TPhi};
}

double optimal_tau(const Protocol& protocol, double t_est) {
  if (!(t_est > 0.0) || !std::isfinite(t_est)) throw DomainError("T estimate must be finite and > 0");
  if (protocol.is_echo()) return kOptimalTauFactor * t_est;
  if (!(protocol.omega > 0.0)) throw ConfigError("free evolution requires omega");
  const double half_period = std::numbers::pi / protocol.omega;
  const auto n = std::max<std::int64_t>(1, std::llround(kOptimalTauFactor * t_est / half_period));
  return static_cast<double>(n) * half_period;
}

double exact_optimal_tau_factor() {
  static const double root = [] {
    auto f = [](double x) { return -std::expm1(-2.0 * x) - x; };
    boost::math::tools::eps_tolerance<double> tol(52);
    std::uintmax_t iters = 100;
    auto [a, b] = boost::math::tools::toms748_solve(f, 0.5, 1.0, tol, iters);
    return 0.5 * (a + b);
  }();
  return root;
}

Peak maximize_cfi_tphi(const Protocol& protocol, double t_phi, double lo, double hi) {
  if (!(hi > lo) || lo < 0.0) throw DomainError("invalid search interval");
  if (protocol.is_echo()) {
    auto objective = [&](double tau) { return -qfi_tphi(tau, t_phi); };
    std::uintmax_t iters = 200;
    auto [tau, neg] = boost::math::tools::brent_find_minima(objective, lo, hi, 52, iters);
    return Peak{tau, -neg};
  }
  const double half_period = std::numbers::pi / protocol.omega;
  const auto first = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(lo / half_period)));
  const auto last = static_cast<std::int64_t>(std::floor(hi / half_period));
  Peak best{};
  for (std::int64_t n = first; n <= last; ++n) {
    const double tau = static_cast<double>(n) * half_period;
    const double f = cfi_tphi(protocol, tau, t_phi).value;
    if (f > best.value) best = Peak{tau, f};
  }
  return best;
}

}  // namespace noisescope
