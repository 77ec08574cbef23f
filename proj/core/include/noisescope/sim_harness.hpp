#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "noisescope/csv.hpp"
#include "noisescope/fisher_info.hpp"
#include "noisescope/noise_model.hpp"
#include "noisescope/sensing_schemes.hpp"

namespace noisescope {

/// Larmor frequency used by the free-evolution simulations.
inline constexpr double kDefaultOmega = 400.0 * std::numbers::pi / 3.0;

/// 1, 2, 5, 10, 20, 50, ... up to and including n_max (n_max is appended when
/// it is not itself on the 1-2-5 ladder).
std::vector<std::size_t> log_checkpoints(std::size_t n_max);

/// Worker count: `requested` if non-zero, else NOISESCOPE_THREADS if set, else
/// the hardware concurrency (at least 1).
unsigned resolve_threads(unsigned requested = 0);

struct PrecisionCurve {
  std::vector<std::size_t> n;
  std::vector<double> rms_error;         ///< sqrt(mean (T_est - T)^2) over trials
  std::vector<double> mean_uncertainty;  ///< mean posterior spread (LSQ: spread of the fits)
  std::vector<double> median_uncertainty;  ///< median posterior spread (LSQ: spread of the fits)
  std::vector<double> opt_ref;           ///< 2.5 T / sqrt(N)
  std::vector<double> crb_ref;           ///< 1/sqrt(N F(tau)) or the LSQ estimate 1.8 sqrt(T tau_max / N)
  std::vector<double> median_tau;        ///< median evolution time used at cycle N (LSQ: tau_max)
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  double true_t_phi = 1.0;
  std::size_t fit_failures = 0;  ///< LSQ only
  std::size_t fit_attempts = 0;  ///< LSQ only

  [[nodiscard]] std::size_t size() const { return n.size(); }
  [[nodiscard]] CsvTable table() const;
};

/// Runs `n_trials` independent trials (trial i draws from substream i of
/// `seed`) and aggregates the error at log_checkpoints(cfg.n_max).
/// LSQ: one checkpoint per N >= M with nu = N / M shots and q = n_trials fits.
/// Throws ConfigError if n_trials < 2.
PrecisionCurve simulate_precision_curve(const SchemeConfig& cfg, double true_t_phi,
                                        std::size_t n_trials, std::uint64_t seed,
                                        unsigned threads = 0);

/// Per-cycle quartiles of the chosen evolution time across trials.
struct TauTrajectory {
  std::vector<std::size_t> cycle;
  std::vector<double> median;
  std::vector<double> lower_quartile;
  std::vector<double> upper_quartile;

  [[nodiscard]] CsvTable table() const;
};

TauTrajectory tau_trajectories(const SchemeConfig& cfg, double true_t_phi, std::size_t n_trials,
                               std::uint64_t seed, unsigned threads = 0);

struct FisherSweepSpec {
  enum class Target { TPhi, Model };

  Target target = Target::TPhi;
  double tau_min = 0.01;
  double tau_max = 5.0;
  std::size_t resolution = 500;
  bool log_spacing = false;

  // TPhi target
  Protocol protocol = Protocol::spin_echo();
  double t_phi = 1.0;

  // Model target
  FisherParam param = FisherParam::Amplitude;
  OUNoiseParams noise{1.0, 0.1};
  double initial_theta = std::numbers::pi / 2.0;
  double omega = 0.0;
  MeasurementAxis axis = MeasurementAxis::x_axis();
};

struct FisherSweep {
  std::vector<double> tau;
  std::vector<double> cfi;
  std::vector<double> qfi;
  Peak cfi_peak;  ///< refined beyond the grid
  Peak qfi_peak;

  [[nodiscard]] CsvTable table() const;
};

/// Tabulates CFI and QFI over the tau grid. Throws ConfigError if
/// resolution < 2 or the range is invalid.
FisherSweep sweep_fisher(const FisherSweepSpec& spec);

/// (1/tau_max) * integral of cfi_tphi over [0, tau_max]. Free evolution is
/// integrated half-period by half-period. Throws DomainError unless tau_max > 0.
FisherValue average_cfi(const Protocol& protocol, double tau_max, double t_phi);

struct ReproduceConfig {
  std::filesystem::path out_dir = ".";
  double t_phi = 1.0;
  double omega = kDefaultOmega;
  double tau_max = 10.0;            ///< LSQ range and Fisher curve extent
  std::size_t lsq_grid_points = 100;
  std::size_t lsq_repetitions = 100;
  std::size_t trials = 200;
  std::size_t n_max = 1000;
  std::size_t repeated_n_max = 10000;
  std::size_t grid_size = 2000;
  unsigned threads = 0;
};

inline constexpr std::string_view kFigureIds[] = {"qfi_curves", "cfi_curves", "echo_precision",
                                                  "free_precision", "tau_trajectories"};

/// Writes the CSV datasets of one figure into cfg.out_dir and returns their
/// paths. Throws ConfigError for an unknown id.
std::vector<std::filesystem::path> reproduce(std::string_view figure_id, const ReproduceConfig& cfg,
                                             std::uint64_t seed);

}  // namespace noisescope
