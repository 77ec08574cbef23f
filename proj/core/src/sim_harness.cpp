#include "noisescope/sim_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <iostream>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include "noisescope/errors.hpp"

namespace noisescope {
namespace {

// Calls body(i) for i in [0, count) on up to `threads` workers. Results must
// be written to per-index slots; the first exception is rethrown.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// Linear-interpolated quantile of a sorted sample.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double reference_fisher(const SchemeConfig& cfg, double t_phi) {
  if (const auto* s = std::get_if<RepeatedScheme>(&cfg.scheme)) {
    return cfi_tphi(cfg.protocol, s->tau, t_phi).value;
  }
  return cfi_tphi(cfg.protocol, optimal_tau(cfg.protocol, t_phi), t_phi).value;
}

PrecisionCurve lsq_precision_curve(const SchemeConfig& cfg, const LsqScheme& scheme,
                                   double true_t_phi, std::size_t n_trials, std::uint64_t seed,
                                   unsigned threads) {
  std::vector<std::size_t> checkpoints;
  for (std::size_t n : log_checkpoints(cfg.n_max)) {
    if (n >= scheme.grid_points) checkpoints.push_back(n);
  }
  if (checkpoints.empty()) throw ConfigError("n_max must reach at least M measurements for LSQ");

  std::vector<LsqResult> results(checkpoints.size());
  parallel_for(checkpoints.size(), threads, [&](std::size_t k) {
    SchemeConfig local = cfg;
    LsqScheme s = scheme;
    s.shots_per_point = checkpoints[k] / scheme.grid_points;
    s.repetitions = n_trials;
    local.scheme = s;
    RandomStream rng(seed, {static_cast<std::uint64_t>(k)});
    results[k] = run_lsq(local, true_t_phi, rng);
  });

  PrecisionCurve curve;
  curve.trials = n_trials;
  curve.seed = seed;
  curve.true_t_phi = true_t_phi;
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    const auto& r = results[k];
    const auto n = static_cast<double>(r.measurements);
    double sq = 0.0;
    for (double t : r.fits) sq += (t - true_t_phi) * (t - true_t_phi);
    curve.n.push_back(r.measurements);
    curve.rms_error.push_back(std::sqrt(sq / static_cast<double>(r.fits.size())));
    curve.mean_uncertainty.push_back(r.estimate.uncertainty);
    curve.median_uncertainty.push_back(r.estimate.uncertainty);
    curve.opt_ref.push_back(2.5 * true_t_phi / std::sqrt(n));
    curve.crb_ref.push_back(1.8 * std::sqrt(true_t_phi * scheme.tau_max / n));
    curve.median_tau.push_back(scheme.tau_max);
    curve.fit_failures += r.failures;
    curve.fit_attempts += r.failures + r.fits.size();
  }
  return curve;
}

std::vector<double> sweep_grid(const FisherSweepSpec& spec) {
  std::vector<double> tau(spec.resolution);
  const double steps = static_cast<double>(spec.resolution - 1);
  for (std::size_t i = 0; i < spec.resolution; ++i) {
    const double f = static_cast<double>(i) / steps;
    tau[i] = spec.log_spacing ? spec.tau_min * std::pow(spec.tau_max / spec.tau_min, f)
                              : spec.tau_min + f * (spec.tau_max - spec.tau_min);
  }
  tau.back() = spec.tau_max;
  return tau;
}

// Grid maximum polished by Brent's method between its neighbours.
template <class F>
Peak refine_peak(F&& f, const std::vector<double>& tau, const std::vector<double>& values) {
  const auto i = static_cast<std::size_t>(
      std::distance(values.begin(), std::max_element(values.begin(), values.end())));
  Peak best{tau[i], values[i]};
  if (i == 0 || i + 1 == tau.size()) return best;
  std::uintmax_t iters = 200;
  const auto [t, neg] = boost::math::tools::brent_find_minima(
      [&](double x) { return -f(x); }, tau[i - 1], tau[i + 1], std::numeric_limits<double>::digits,
      iters);
  if (-neg > best.value) best = Peak{t, -neg};
  return best;
}

std::string protocol_name(const Protocol& p) { return p.is_echo() ? "echo" : "free"; }

std::string scheme_name(const Scheme& s) {
  switch (s.index()) {
    case 0: return "repeated";
    case 1: return "adaptive-cfi";
    case 2: return "adaptive-lo";
    default: return "lsq";
  }
}

CsvMetadata base_metadata(std::string_view figure, const ReproduceConfig& cfg, std::uint64_t seed) {
  return {{"figure", std::string(figure)},
          {"seed", std::to_string(seed)},
          {"t_phi", format_number(cfg.t_phi)},
          {"omega", format_number(cfg.omega)},
          {"tau_max", format_number(cfg.tau_max)},
          {"trials", std::to_string(cfg.trials)},
          {"n_max", std::to_string(cfg.n_max)},
          {"grid", std::to_string(cfg.grid_size)}};
}

SchemeConfig scheme_config(const ReproduceConfig& cfg, Scheme scheme, const Protocol& protocol) {
  SchemeConfig sc;
  sc.scheme = scheme;
  sc.protocol = protocol;
  sc.prior.grid_size = cfg.grid_size;
  sc.n_max = cfg.n_max;
  return sc;
}

std::filesystem::path save(const CsvTable& table, const ReproduceConfig& cfg,
                           const std::string& name, const CsvMetadata& metadata) {
  const auto path = cfg.out_dir / name;
  table.save(path, metadata);
  return path;
}

std::vector<std::filesystem::path> reproduce_qfi_curves(const ReproduceConfig& cfg,
                                                         std::uint64_t seed) {
  struct NoiseSet {
    const char* name;
    OUNoiseParams noise;
  };
  const NoiseSet sets[] = {{"markovian", {1.0, 0.1}}, {"non_markovian", {1.0, 2.0}}};
  const FisherParam params[] = {FisherParam::Omega, FisherParam::Amplitude, FisherParam::MemoryTime};

  std::vector<std::filesystem::path> files;
  for (const auto& set : sets) {
    FisherSweepSpec spec;
    spec.target = FisherSweepSpec::Target::Model;
    spec.noise = set.noise;
    spec.omega = cfg.omega;
    spec.tau_min = 1e-3;
    spec.tau_max = 100.0;
    spec.resolution = 601;
    spec.log_spacing = true;

    CsvTable table({"tau", "qfi_omega", "qfi_b", "qfi_tau_c"});
    std::vector<FisherSweep> sweeps;
    for (FisherParam p : params) {
      spec.param = p;
      sweeps.push_back(sweep_fisher(spec));
    }
    for (std::size_t i = 0; i < spec.resolution; ++i) {
      table.add_row({sweeps[0].tau[i], sweeps[0].qfi[i], sweeps[1].qfi[i], sweeps[2].qfi[i]});
    }
    auto meta = base_metadata("qfi_curves", cfg, seed);
    meta.emplace_back("noise_b", format_number(set.noise.amplitude));
    meta.emplace_back("noise_tau_c", format_number(set.noise.memory_time));
    meta.emplace_back("t_phi_noise", format_number(dephasing_time(set.noise)));
    const char* labels[] = {"omega", "b", "tau_c"};
    for (std::size_t k = 0; k < 3; ++k) {
      meta.emplace_back(std::string("peak_") + labels[k],
                        "tau=" + format_number(sweeps[k].qfi_peak.tau) +
                            " value=" + format_number(sweeps[k].qfi_peak.value));
    }
    files.push_back(save(table, cfg, std::string("qfi_curves_") + set.name + ".csv", meta));
  }
  return files;
}

std::vector<std::filesystem::path> reproduce_cfi_curves(const ReproduceConfig& cfg,
                                                         std::uint64_t seed) {
  std::vector<std::filesystem::path> files;
  for (const Protocol& protocol : {Protocol::spin_echo(), Protocol::free_evolution(cfg.omega)}) {
    FisherSweepSpec spec;
    spec.protocol = protocol;
    spec.t_phi = cfg.t_phi;
    spec.tau_min = 0.0;
    spec.tau_max = 5.0 * cfg.t_phi;
    spec.resolution = 4001;
    const FisherSweep sweep = sweep_fisher(spec);
    auto meta = base_metadata("cfi_curves", cfg, seed);
    meta.emplace_back("protocol", protocol_name(protocol));
    meta.emplace_back("cfi_peak", "tau=" + format_number(sweep.cfi_peak.tau) +
                                      " value=" + format_number(sweep.cfi_peak.value));
    meta.emplace_back("average_cfi",
                      format_number(average_cfi(protocol, cfg.tau_max, cfg.t_phi).value));
    files.push_back(save(sweep.table(), cfg, "cfi_curves_" + protocol_name(protocol) + ".csv", meta));
  }

  // Simulated symbols: information per measurement recovered from the
  // posterior spread of the repeated scheme.
  CsvTable symbols({"tau", "N", "fisher_from_uncertainty", "fisher_from_rms", "cfi"});
  std::uint64_t sub = 0;
  for (double factor : {0.1, 0.8, 3.0}) {
    SchemeConfig sc = scheme_config(cfg, RepeatedScheme{factor * cfg.t_phi}, Protocol::spin_echo());
    sc.n_max = cfg.repeated_n_max;
    const auto curve = simulate_precision_curve(sc, cfg.t_phi, cfg.trials,
                                                RandomStream(seed, {sub++}).next_u64(), cfg.threads);
    const auto n = static_cast<double>(curve.n.back());
    const double u = curve.mean_uncertainty.back();
    const double r = curve.rms_error.back();
    symbols.add_row({factor * cfg.t_phi, n, 1.0 / (u * u * n), 1.0 / (r * r * n),
                     cfi_tphi(Protocol::spin_echo(), factor * cfg.t_phi, cfg.t_phi).value});
  }
  auto meta = base_metadata("cfi_curves", cfg, seed);
  meta.emplace_back("protocol", "echo");
  meta.emplace_back("repeated_n_max", std::to_string(cfg.repeated_n_max));
  files.push_back(save(symbols, cfg, "cfi_curves_repeated_symbols.csv", meta));
  return files;
}

std::vector<std::filesystem::path> reproduce_precision(std::string_view figure,
                                                       const ReproduceConfig& cfg,
                                                       const Protocol& protocol,
                                                       std::uint64_t seed) {
  LsqScheme lsq;
  lsq.tau_max = cfg.tau_max;
  lsq.grid_points = cfg.lsq_grid_points;
  lsq.repetitions = cfg.lsq_repetitions;
  const Scheme schemes[] = {AdaptiveCfiScheme{}, AdaptiveLocallyOptimalScheme{}, lsq};

  std::vector<std::filesystem::path> files;
  std::uint64_t sub = 0;
  for (const Scheme& scheme : schemes) {
    const SchemeConfig sc = scheme_config(cfg, scheme, protocol);
    const bool is_lsq = std::holds_alternative<LsqScheme>(scheme);
    const auto curve =
        simulate_precision_curve(sc, cfg.t_phi, is_lsq ? cfg.lsq_repetitions : cfg.trials,
                                 RandomStream(seed, {sub++}).next_u64(), cfg.threads);
    auto meta = base_metadata(figure, cfg, seed);
    meta.emplace_back("protocol", protocol_name(protocol));
    meta.emplace_back("scheme", scheme_name(scheme));
    meta.emplace_back("curve_seed", std::to_string(curve.seed));
    if (is_lsq) {
      meta.emplace_back("lsq_M", std::to_string(lsq.grid_points));
      meta.emplace_back("lsq_q", std::to_string(lsq.repetitions));
      meta.emplace_back("fit_failures", std::to_string(curve.fit_failures));
    }
    std::string name = scheme_name(scheme);
    std::replace(name.begin(), name.end(), '-', '_');
    files.push_back(save(curve.table(), cfg, std::string(figure) + "_" + name + ".csv", meta));
  }
  return files;
}

std::vector<std::filesystem::path> reproduce_tau_trajectories(const ReproduceConfig& cfg,
                                                               std::uint64_t seed) {
  std::vector<std::filesystem::path> files;
  std::uint64_t sub = 0;
  for (const Protocol& protocol : {Protocol::spin_echo(), Protocol::free_evolution(cfg.omega)}) {
    for (const Scheme& scheme : {Scheme{AdaptiveCfiScheme{}}, Scheme{AdaptiveLocallyOptimalScheme{}}}) {
      const SchemeConfig sc = scheme_config(cfg, scheme, protocol);
      const auto traj = tau_trajectories(sc, cfg.t_phi, cfg.trials,
                                         RandomStream(seed, {sub++}).next_u64(), cfg.threads);
      auto meta = base_metadata("tau_trajectories", cfg, seed);
      meta.emplace_back("protocol", protocol_name(protocol));
      meta.emplace_back("scheme", scheme_name(scheme));
      meta.emplace_back("target_tau", format_number(optimal_tau(protocol, cfg.t_phi)));
      std::string name = scheme_name(scheme);
      std::replace(name.begin(), name.end(), '-', '_');
      files.push_back(save(traj.table(), cfg,
                           "tau_trajectories_" + protocol_name(protocol) + "_" + name + ".csv", meta));
    }
  }
  return files;
}

}  // namespace

std::vector<std::size_t> log_checkpoints(std::size_t n_max) {
  std::vector<std::size_t> out;
  for (std::size_t decade = 1; decade <= n_max; decade *= 10) {
    for (std::size_t m : {1, 2, 5}) {
      if (m * decade <= n_max) out.push_back(m * decade);
    }
    if (decade > n_max / 10) break;
  }
  if (n_max > 0 && (out.empty() || out.back() != n_max)) out.push_back(n_max);
  return out;
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("NOISESCOPE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

CsvTable PrecisionCurve::table() const {
  CsvTable t({"N", "rms_error", "mean_uncertainty", "median_uncertainty", "opt_ref", "crb_ref",
              "median_tau"});
  for (std::size_t k = 0; k < n.size(); ++k) {
    t.add_row(std::vector<CsvCell>{static_cast<std::int64_t>(n[k]), rms_error[k],
                                   mean_uncertainty[k], median_uncertainty[k], opt_ref[k],
                                   crb_ref[k], median_tau[k]});
  }
  return t;
}

PrecisionCurve simulate_precision_curve(const SchemeConfig& cfg, double true_t_phi,
                                        std::size_t n_trials, std::uint64_t seed,
                                        unsigned threads) {
  if (n_trials < 2) throw ConfigError("need at least 2 trials for an ensemble error");
  if (!(true_t_phi > 0.0)) throw ConfigError("true T_phi must be > 0");
  cfg.validate();
  threads = resolve_threads(threads);
  if (const auto* lsq = std::get_if<LsqScheme>(&cfg.scheme)) {
    return lsq_precision_curve(cfg, *lsq, true_t_phi, n_trials, seed, threads);
  }

  const auto checkpoints = log_checkpoints(cfg.n_max);
  const RecordPolicy policy = RecordPolicy::at(checkpoints);
  const std::size_t k_count = checkpoints.size();
  std::vector<double> estimates(n_trials * k_count);
  std::vector<double> spreads(n_trials * k_count);
  std::vector<double> taus(n_trials * k_count);
  std::vector<char> edge(n_trials, 0);

  parallel_for(n_trials, threads, [&](std::size_t i) {
    RandomStream rng(seed, {static_cast<std::uint64_t>(i)});
    const TrialRecord rec = run_trial(cfg, true_t_phi, rng, policy);
    for (std::size_t k = 0; k < k_count; ++k) {
      estimates[i * k_count + k] = rec.cycles[k].estimate;
      spreads[i * k_count + k] = rec.cycles[k].uncertainty;
      taus[i * k_count + k] = rec.cycles[k].tau;
    }
    edge[i] = rec.posterior.boundary_mass() > 1e-3;
  });

  const auto at_edge = std::count(edge.begin(), edge.end(), 1);
  if (at_edge > 0) {
    std::cerr << "warning: " << at_edge << " of " << n_trials
              << " posteriors carry > 1e-3 mass at the prior boundary\n";
  }

  const double fisher = reference_fisher(cfg, true_t_phi);
  PrecisionCurve curve;
  curve.trials = n_trials;
  curve.seed = seed;
  curve.true_t_phi = true_t_phi;
  std::vector<double> tau_column(n_trials);
  std::vector<double> spread_column(n_trials);
  for (std::size_t k = 0; k < k_count; ++k) {
    double sq = 0.0;
    double spread = 0.0;
    for (std::size_t i = 0; i < n_trials; ++i) {
      const double e = estimates[i * k_count + k] - true_t_phi;
      sq += e * e;
      spread += spreads[i * k_count + k];
      tau_column[i] = taus[i * k_count + k];
      spread_column[i] = spreads[i * k_count + k];
    }
    std::sort(tau_column.begin(), tau_column.end());
    std::sort(spread_column.begin(), spread_column.end());
    curve.median_tau.push_back(quantile(tau_column, 0.5));
    curve.median_uncertainty.push_back(quantile(spread_column, 0.5));
    const auto n = static_cast<double>(checkpoints[k]);
    curve.n.push_back(checkpoints[k]);
    curve.rms_error.push_back(std::sqrt(sq / static_cast<double>(n_trials)));
    curve.mean_uncertainty.push_back(spread / static_cast<double>(n_trials));
    curve.opt_ref.push_back(2.5 * true_t_phi / std::sqrt(n));
    curve.crb_ref.push_back(crb_precision(fisher, static_cast<long>(checkpoints[k])));
  }
  return curve;
}

CsvTable TauTrajectory::table() const {
  CsvTable t({"cycle", "median_tau", "lower_quartile", "upper_quartile"});
  for (std::size_t k = 0; k < cycle.size(); ++k) {
    t.add_row(std::vector<CsvCell>{static_cast<std::int64_t>(cycle[k]), median[k], lower_quartile[k], upper_quartile[k]});
  }
  return t;
}

TauTrajectory tau_trajectories(const SchemeConfig& cfg, double true_t_phi, std::size_t n_trials,
                               std::uint64_t seed, unsigned threads) {
  if (n_trials < 1) throw ConfigError("need at least 1 trial");
  cfg.validate();
  const std::size_t n = cfg.n_max;
  std::vector<double> taus(n_trials * n);
  parallel_for(n_trials, resolve_threads(threads), [&](std::size_t i) {
    RandomStream rng(seed, {static_cast<std::uint64_t>(i)});
    const TrialRecord rec = run_trial(cfg, true_t_phi, rng, RecordPolicy::every_cycle());
    for (std::size_t c = 0; c < n; ++c) taus[i * n + c] = rec.cycles[c].tau;
  });

  TauTrajectory out;
  std::vector<double> column(n_trials);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = 0; i < n_trials; ++i) column[i] = taus[i * n + c];
    std::sort(column.begin(), column.end());
    out.cycle.push_back(c + 1);
    out.median.push_back(quantile(column, 0.5));
    out.lower_quartile.push_back(quantile(column, 0.25));
    out.upper_quartile.push_back(quantile(column, 0.75));
  }
  return out;
}

CsvTable FisherSweep::table() const {
  CsvTable t({"tau", "cfi", "qfi"});
  for (std::size_t i = 0; i < tau.size(); ++i) t.add_row({tau[i], cfi[i], qfi[i]});
  return t;
}

FisherSweep sweep_fisher(const FisherSweepSpec& spec) {
  if (spec.resolution < 2) throw ConfigError("sweep resolution must be >= 2");
  if (!(spec.tau_max > spec.tau_min) || spec.tau_min < 0.0 ||
      (spec.log_spacing && !(spec.tau_min > 0.0))) {
    throw ConfigError("invalid tau range for the sweep");
  }

  std::function<double(double)> cfi;
  std::function<double(double)> qfi;
  if (spec.target == FisherSweepSpec::Target::TPhi) {
    if (!(spec.t_phi > 0.0)) throw ConfigError("T_phi must be > 0");
    cfi = [&](double tau) { return cfi_tphi(spec.protocol, tau, spec.t_phi).value; };
    qfi = [&](double tau) { return qfi_tphi(tau, spec.t_phi); };
  } else {
    if (spec.param == FisherParam::TPhi) throw ConfigError("model sweeps take omega, b or tau_c");
    (void)OUNoiseParams::make(spec.noise.amplitude, spec.noise.memory_time);
    cfi = [&](double tau) {
      return cfi_model(spec.param, spec.initial_theta, tau, spec.axis, spec.noise, spec.omega).value;
    };
    qfi = [&](double tau) {
      return qfi_model(spec.param, spec.initial_theta, tau, spec.noise, spec.omega).value;
    };
  }

  FisherSweep out;
  out.tau = sweep_grid(spec);
  out.cfi.reserve(out.tau.size());
  out.qfi.reserve(out.tau.size());
  for (double tau : out.tau) {
    out.cfi.push_back(cfi(tau));
    out.qfi.push_back(qfi(tau));
  }
  if (spec.target == FisherSweepSpec::Target::TPhi && !spec.protocol.is_echo()) {
    out.cfi_peak = maximize_cfi_tphi(spec.protocol, spec.t_phi, spec.tau_min, spec.tau_max);
  } else {
    out.cfi_peak = refine_peak(cfi, out.tau, out.cfi);
  }
  out.qfi_peak = refine_peak(qfi, out.tau, out.qfi);
  return out;
}

FisherValue average_cfi(const Protocol& protocol, double tau_max, double t_phi) {
  if (!(tau_max > 0.0) || !std::isfinite(tau_max)) throw DomainError("tau_max must be > 0");
  if (!(t_phi > 0.0)) throw DomainError("T_phi must be > 0");
  auto f = [&](double tau) { return cfi_tphi(protocol, tau, t_phi).value; };
  double integral = 0.0;
  if (protocol.is_echo()) {
    integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, tau_max, 15,
                                                                             1e-12);
  } else {
    // cos^2(omega tau) oscillates; each half period is smooth on its own.
    const double half_period = std::numbers::pi / protocol.omega;
    double a = 0.0;
    while (a < tau_max) {
      const double b = std::min(tau_max, a + half_period);
      integral += boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
      a = b;
    }
  }
  return FisherValue{integral / tau_max, FisherParam::TPhi};
}

std::vector<std::filesystem::path> reproduce(std::string_view figure_id, const ReproduceConfig& cfg,
                                             std::uint64_t seed) {
  if (std::find(std::begin(kFigureIds), std::end(kFigureIds), figure_id) == std::end(kFigureIds)) {
    throw ConfigError("unknown figure id '" + std::string(figure_id) + "'");
  }
  if (!(cfg.t_phi > 0.0) || !(cfg.omega > 0.0) || !(cfg.tau_max > 0.0)) {
    throw ConfigError("t_phi, omega and tau_max must be > 0");
  }
  std::filesystem::create_directories(cfg.out_dir);
  if (figure_id == "qfi_curves") return reproduce_qfi_curves(cfg, seed);
  if (figure_id == "cfi_curves") return reproduce_cfi_curves(cfg, seed);
  if (figure_id == "echo_precision") {
    return reproduce_precision(figure_id, cfg, Protocol::spin_echo(), seed);
  }
  if (figure_id == "free_precision") {
    return reproduce_precision(figure_id, cfg, Protocol::free_evolution(cfg.omega), seed);
  }
  return reproduce_tau_trajectories(cfg, seed);
}

}  // namespace noisescope
