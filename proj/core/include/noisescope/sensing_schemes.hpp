#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

#include "noisescope/bayes_estimation.hpp"
#include "noisescope/random.hpp"
#include "noisescope/spin_dynamics.hpp"

namespace noisescope {

/// Fixed evolution time for every cycle.
struct RepeatedScheme {
  double tau = 0.8;
};

/// tau = optimal_tau(protocol, T_M) with T_M the current MLE.
struct AdaptiveCfiScheme {};

/// tau minimising the expected posterior spread after one more outcome,
/// searched over `candidates` log-spaced points in [lower, upper] * T_M
/// (snapped to the n pi/omega lattice for free evolution).
struct AdaptiveLocallyOptimalScheme {
  std::size_t candidates = 60;
  double lower_factor = 0.05;
  double upper_factor = 5.0;
  /// Free evolution only: score every n pi / omega in the range instead of
  /// snapping the log-spaced candidates to the lattice. Cost grows with omega T_M.
  bool full_lattice = false;
};

/// Least-squares fit of averaged outcomes on tau_k = k * dtau, k = 1..M.
struct LsqScheme {
  double tau_max = 10.0;
  std::size_t grid_points = 100;       ///< M
  std::size_t shots_per_point = 100;   ///< nu
  std::size_t repetitions = 100;       ///< q
};

using Scheme = std::variant<RepeatedScheme, AdaptiveCfiScheme, AdaptiveLocallyOptimalScheme, LsqScheme>;

struct SchemeConfig {
  Scheme scheme = AdaptiveCfiScheme{};
  Protocol protocol = Protocol::spin_echo();
  PriorSpec prior{};
  std::size_t n_max = 1000;

  /// Throws ConfigError on non-positive times or LSQ sizes below M >= 2,
  /// nu >= 1, q >= 2.
  void validate() const;
};

enum class AdaptiveVariant { Cfi, LocallyOptimal };

struct CycleRecord {
  std::size_t cycle = 0;  ///< 1-based
  double tau = 0.0;
  int outcome = 0;
  double estimate = 0.0;     ///< MLE after this cycle's update
  double uncertainty = 0.0;  ///< posterior spread about the MLE
};

/// Which cycles get a CycleRecord. Empty checkpoint list = every cycle.
struct RecordPolicy {
  std::vector<std::size_t> checkpoints;

  static RecordPolicy every_cycle() { return {}; }
  static RecordPolicy at(std::vector<std::size_t> cycles);
};

struct TrialRecord {
  std::vector<CycleRecord> cycles;
  PosteriorGrid posterior;
};

TrialRecord run_repeated(const SchemeConfig& cfg, double true_t_phi, RandomStream& rng,
                         const RecordPolicy& policy = RecordPolicy::every_cycle());

TrialRecord run_adaptive(const SchemeConfig& cfg, AdaptiveVariant variant, double true_t_phi,
                         RandomStream& rng, const RecordPolicy& policy = RecordPolicy::every_cycle());

/// Dispatches on cfg.scheme (LSQ is not a per-cycle scheme and is rejected).
TrialRecord run_trial(const SchemeConfig& cfg, double true_t_phi, RandomStream& rng,
                      const RecordPolicy& policy = RecordPolicy::every_cycle());

/// Outcome-averaged posterior spread after one hypothetical measurement at
/// `tau`: sum_u P(u | T_M) * delta(u, tau), delta being the spread about the
/// updated MLE. T_M defaults to the MLE of `post`.
double expected_uncertainty(const PosteriorGrid& post, double tau, const Protocol& protocol);
double expected_uncertainty(const PosteriorGrid& post, double tau, const Protocol& protocol,
                            double t_m);

/// Reusable evaluator behind expected_uncertainty: caches the posterior's
/// point masses on its support so many candidate taus can be scored cheaply.
class ExpectedUncertainty {
 public:
  ExpectedUncertainty(const PosteriorGrid& post, const Protocol& protocol, double t_m);
  [[nodiscard]] double operator()(double tau) const;

 private:
  Protocol protocol_;
  double t_m_;
  double step_;
  std::vector<double> mass_;
  std::vector<double> offset_;
  std::vector<double> inv_value_;
  double moment_[3] = {0.0, 0.0, 0.0};  ///< sum of m, m d, m d^2 with d = T - T_M
};

/// Candidate evolution times for the locally optimal rule, ascending.
std::vector<double> candidate_taus(const Protocol& protocol, double t_m,
                                   const AdaptiveLocallyOptimalScheme& scheme);

/// Candidate with the smallest expected uncertainty (first on ties).
double locally_optimal_tau(const PosteriorGrid& post, const Protocol& protocol, double t_m,
                           std::span<const double> candidates);

struct DecaySample {
  double tau = 0.0;
  double mean = 0.0;  ///< averaged +-1 outcome
};

/// Least-squares T_phi for exp(-tau/T) (echo) or cos(omega tau) exp(-tau/T)
/// (free evolution). Throws FitFailure when no interior minimum is found.
Estimate fit_decay(const Protocol& protocol, std::span<const DecaySample> samples);

/// Grid spacing: tau_max / M for the echo; the nearest multiple (>= 1) of
/// pi/omega for free evolution so that only the envelope is sampled.
double lsq_grid_spacing(const Protocol& protocol, double tau_max, std::size_t grid_points);

struct LsqResult {
  Estimate estimate;             ///< mean of the fits; uncertainty = their spread
  std::vector<double> fits;      ///< successful fits only
  std::size_t failures = 0;
  std::size_t measurements = 0;  ///< nu * M per fit
  double grid_spacing = 0.0;

  [[nodiscard]] double failure_rate() const;
};

/// q independent fits; throws FitFailure if fewer than two succeed.
LsqResult run_lsq(const SchemeConfig& cfg, double true_t_phi, RandomStream& rng);

/// Writes "cycle,tau,outcome,estimate,uncertainty" rows.
void write_trial_csv(std::ostream& out, const TrialRecord& record);

}  // namespace noisescope
