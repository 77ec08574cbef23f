#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "noisescope/bayes_estimation.hpp"
#include "noisescope/csv.hpp"
#include "noisescope/errors.hpp"
#include "noisescope/fisher_info.hpp"
#include "noisescope/sensing_schemes.hpp"
#include "noisescope/sim_harness.hpp"

namespace noisescope::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct Options {
  std::string protocol = "echo";
  std::string scheme = "adaptive-cfi";
  std::string param = "tphi";
  std::string figure;
  std::string outcomes = "++";
  std::string out_dir = "noisescope_out";
  double tau = 0.8;
  double tau_max = 10.0;
  double t_phi = 1.0;
  double omega = kDefaultOmega;
  double b = 1.0;
  double tau_c = 0.1;
  double omega_max = 0.0;
  double max_fit_failure_rate = 0.05;
  std::size_t grid = 2000;
  std::size_t resolution = 500;
  std::size_t trials = 200;
  std::size_t n_max = 1000;
  std::size_t lsq_points = 100;
  std::size_t shots = 100;
  std::size_t repetitions = 100;
  std::uint64_t seed = 1;
  bool full_lattice = false;
};

struct Outputs {
  std::vector<fs::path> files;
  json summary = json::object();
  int status = kOk;
};

Protocol make_protocol(const Options& o) {
  return o.protocol == "echo" ? Protocol::spin_echo() : Protocol::free_evolution(o.omega);
}

void require(bool condition, const std::string& message) {
  if (!condition) throw ConfigError(message);
}

void validate_common(const Options& o) {
  require(o.t_phi > 0.0 && std::isfinite(o.t_phi), "--t-phi must be > 0");
  require(o.omega > 0.0 && std::isfinite(o.omega), "--omega must be > 0");
  require(o.tau_max > 0.0 && std::isfinite(o.tau_max), "--tau-max must be > 0");
  require(o.grid >= 2, "--grid must be >= 2");
}

std::string fixed(double v, int digits = 5) {
  std::ostringstream s;
  s << std::setprecision(digits) << std::fixed << v;
  return s.str();
}

fs::path prepare_out_dir(const Options& o) {
  fs::path dir(o.out_dir);
  fs::create_directories(dir);
  return dir;
}

CsvMetadata run_metadata(const std::string& command, const Options& o) {
  return {{"command", command},         {"protocol", o.protocol},
          {"t_phi", format_number(o.t_phi)}, {"omega", format_number(o.omega)},
          {"tau_max", format_number(o.tau_max)}, {"seed", std::to_string(o.seed)}};
}

Outputs cmd_fisher(const Options& o, std::ostream& out) {
  validate_common(o);
  require(o.resolution >= 2, "--resolution must be >= 2");
  FisherSweepSpec spec;
  spec.tau_min = 0.0;
  spec.tau_max = o.tau_max;
  spec.resolution = o.resolution;
  if (o.param == "tphi") {
    spec.protocol = make_protocol(o);
    spec.t_phi = o.t_phi;
  } else {
    require(o.b > 0.0 && o.tau_c > 0.0, "--b and --tau-c must be > 0");
    spec.target = FisherSweepSpec::Target::Model;
    spec.param = o.param == "omega" ? FisherParam::Omega
                 : o.param == "b"   ? FisherParam::Amplitude
                                    : FisherParam::MemoryTime;
    spec.noise = OUNoiseParams::make(o.b, o.tau_c);
    spec.omega = o.omega;
    spec.tau_min = o.tau_max / static_cast<double>(o.resolution);
  }
  const FisherSweep sweep = sweep_fisher(spec);

  Outputs result;
  auto meta = run_metadata("fisher", o);
  meta.emplace_back("param", o.param);
  meta.emplace_back("cfi_peak_tau", format_number(sweep.cfi_peak.tau));
  meta.emplace_back("cfi_peak_value", format_number(sweep.cfi_peak.value));
  meta.emplace_back("qfi_peak_tau", format_number(sweep.qfi_peak.tau));
  meta.emplace_back("qfi_peak_value", format_number(sweep.qfi_peak.value));
  const fs::path path = prepare_out_dir(o) / "fisher.csv";
  sweep.table().save(path, meta);
  result.files.push_back(path);

  result.summary["cfi_peak"] = {{"tau", sweep.cfi_peak.tau}, {"value", sweep.cfi_peak.value}};
  result.summary["qfi_peak"] = {{"tau", sweep.qfi_peak.tau}, {"value", sweep.qfi_peak.value}};
  out << "fisher " << o.param << "/" << o.protocol << ": CFI peak " << fixed(sweep.cfi_peak.value)
      << " at tau " << fixed(sweep.cfi_peak.tau, 4) << ", QFI peak " << fixed(sweep.qfi_peak.value)
      << " at tau " << fixed(sweep.qfi_peak.tau, 4);
  if (o.param == "tphi") {
    const double average = average_cfi(make_protocol(o), o.tau_max, o.t_phi).value;
    result.summary["average_cfi"] = average;
    out << ", average CFI over [0, " << format_number(o.tau_max) << "] " << fixed(average);
  }
  out << '\n';
  return result;
}

SchemeConfig scheme_config(const Options& o) {
  SchemeConfig cfg;
  cfg.protocol = make_protocol(o);
  cfg.prior.grid_size = o.grid;
  cfg.n_max = o.n_max;
  if (o.scheme == "repeated") {
    cfg.scheme = RepeatedScheme{o.tau};
  } else if (o.scheme == "adaptive-cfi") {
    cfg.scheme = AdaptiveCfiScheme{};
  } else if (o.scheme == "adaptive-lo") {
    AdaptiveLocallyOptimalScheme lo;
    lo.full_lattice = o.full_lattice;
    cfg.scheme = lo;
  } else {
    cfg.scheme = LsqScheme{o.tau_max, o.lsq_points, o.shots, o.repetitions};
  }
  cfg.validate();
  return cfg;
}

Outputs cmd_simulate(const Options& o, std::ostream& out) {
  validate_common(o);
  require(o.trials >= 2, "--trials must be >= 2");
  require(o.n_max >= 1, "--n-max must be >= 1");
  const SchemeConfig cfg = scheme_config(o);
  const PrecisionCurve curve = simulate_precision_curve(cfg, o.t_phi, o.trials, o.seed);

  Outputs result;
  auto meta = run_metadata("simulate", o);
  meta.emplace_back("scheme", o.scheme);
  meta.emplace_back("trials", std::to_string(o.trials));
  meta.emplace_back("n_max", std::to_string(o.n_max));
  meta.emplace_back("grid", std::to_string(o.grid));
  if (o.scheme == "repeated") meta.emplace_back("tau", format_number(o.tau));
  const fs::path path = prepare_out_dir(o) / "precision_curve.csv";
  curve.table().save(path, meta);
  result.files.push_back(path);

  const std::size_t last = curve.size() - 1;
  result.summary["N"] = curve.n[last];
  result.summary["rms_error"] = curve.rms_error[last];
  result.summary["mean_uncertainty"] = curve.mean_uncertainty[last];
  result.summary["opt_ref"] = curve.opt_ref[last];
  out << "simulate " << o.scheme << "/" << o.protocol << ": RMS error " << fixed(curve.rms_error[last])
      << " at N=" << curve.n[last] << " over " << o.trials << " trials (optimal "
      << fixed(curve.opt_ref[last]) << ")\n";

  if (curve.fit_attempts > 0) {
    const double rate =
        static_cast<double>(curve.fit_failures) / static_cast<double>(curve.fit_attempts);
    result.summary["fit_failure_rate"] = rate;
    if (rate > o.max_fit_failure_rate) result.status = kFitFailure;
  }
  return result;
}

Outputs cmd_fit(const Options& o, std::ostream& out) {
  validate_common(o);
  Options lsq = o;
  lsq.scheme = "lsq";
  const SchemeConfig cfg = scheme_config(lsq);
  RandomStream rng(o.seed);
  const LsqResult fit = run_lsq(cfg, o.t_phi, rng);

  Outputs result;
  CsvTable table({"repetition", "t_phi_fit"});
  for (std::size_t i = 0; i < fit.fits.size(); ++i) {
    table.add_row(std::vector<CsvCell>{static_cast<std::int64_t>(i), fit.fits[i]});
  }
  auto meta = run_metadata("fit", o);
  meta.emplace_back("M", std::to_string(o.lsq_points));
  meta.emplace_back("nu", std::to_string(o.shots));
  meta.emplace_back("q", std::to_string(o.repetitions));
  meta.emplace_back("grid_spacing", format_number(fit.grid_spacing));
  meta.emplace_back("failures", std::to_string(fit.failures));
  const fs::path path = prepare_out_dir(o) / "lsq_fits.csv";
  table.save(path, meta);
  result.files.push_back(path);

  result.summary["t_phi"] = fit.estimate.point;
  result.summary["spread"] = fit.estimate.uncertainty;
  result.summary["measurements_per_fit"] = fit.measurements;
  result.summary["fit_failure_rate"] = fit.failure_rate();
  out << "fit lsq/" << o.protocol << ": T_phi " << fixed(fit.estimate.point) << " +- "
      << fixed(fit.estimate.uncertainty) << " from " << fit.fits.size() << " fits of "
      << fit.measurements << " measurements (failure rate " << fixed(fit.failure_rate(), 3) << ")\n";
  if (fit.failure_rate() > o.max_fit_failure_rate) result.status = kFitFailure;
  return result;
}

Outputs cmd_reproduce(const Options& o, std::ostream& out) {
  validate_common(o);
  require(o.trials >= 2, "--trials must be >= 2");
  ReproduceConfig cfg;
  cfg.out_dir = o.out_dir;
  cfg.t_phi = o.t_phi;
  cfg.omega = o.omega;
  cfg.tau_max = o.tau_max;
  cfg.lsq_grid_points = o.lsq_points;
  cfg.lsq_repetitions = o.repetitions;
  cfg.trials = o.trials;
  cfg.n_max = o.n_max;
  cfg.grid_size = o.grid;

  Outputs result;
  result.files = reproduce(o.figure, cfg, o.seed);
  result.summary["figure"] = o.figure;
  result.summary["files"] = result.files.size();
  out << "reproduce " << o.figure << ": wrote " << result.files.size() << " file(s) to "
      << o.out_dir << '\n';
  return result;
}

Outputs cmd_demo_omega(const Options& o, std::ostream& out) {
  require(o.tau > 0.0, "--tau must be > 0");
  require(o.resolution >= 3, "--resolution must be >= 3");
  require(!o.outcomes.empty() &&
              o.outcomes.find_first_not_of("+-") == std::string::npos,
          "--outcomes must be a non-empty string of '+' and '-'");
  const double omega_max = o.omega_max > 0.0 ? o.omega_max : 20.0 * std::numbers::pi / o.tau;

  // Pure-state Ramsey readout: P(u | omega) = (1 + u cos(omega tau)) / 2.
  PosteriorGrid post = PosteriorGrid::flat(0.0, omega_max, o.resolution);
  for (char c : o.outcomes) {
    const double u = c == '+' ? 1.0 : -1.0;
    post.update([&](double omega) { return 0.5 * (1.0 + u * std::cos(omega * o.tau)); });
  }

  const auto lw = post.log_weights();
  const auto x = post.values();
  const double top = *std::max_element(lw.begin(), lw.end());
  // Interior local maxima within 0.5 log units of the highest one (grid
  // points straddle the true peaks, so exact equality is not expected).
  std::vector<double> peaks;
  for (std::size_t i = 1; i + 1 < lw.size(); ++i) {
    if (lw[i] > lw[i - 1] && lw[i] >= lw[i + 1] && lw[i] > top - 0.5) peaks.push_back(x[i]);
  }

  Outputs result;
  CsvMetadata meta{{"command", "demo-omega"},
                   {"outcomes", o.outcomes},
                   {"tau", format_number(o.tau)},
                   {"omega_max", format_number(omega_max)}};
  std::string peak_list;
  for (double p : peaks) peak_list += (peak_list.empty() ? "" : " ") + format_number(p);
  meta.emplace_back("peaks", peak_list);
  const fs::path path = prepare_out_dir(o) / "omega_posterior.csv";
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open " + path.string());
  for (const auto& [k, v] : meta) file << "# " << k << ": " << v << '\n';
  write_posterior_csv(file, post);
  result.files.push_back(path);

  result.summary["peaks"] = peaks;
  result.summary["mle_unique"] = mle(post).unique;
  out << "demo-omega " << o.outcomes << ": " << peaks.size()
      << " near-equal posterior peaks (spacing 2 pi / tau = "
      << fixed(2.0 * std::numbers::pi / o.tau, 4) << ")"
      << (peaks.size() > 1 ? "; the maximum likelihood estimate is not unique" : "") << '\n';
  return result;
}

void write_manifest(const std::string& command, const Options& o, const Outputs& result,
                    const std::vector<std::string>& args) {
  json manifest;
  manifest["tool"] = "noisescope";
  manifest["command"] = command;
  manifest["arguments"] = args;
  manifest["config"] = {{"protocol", o.protocol}, {"scheme", o.scheme},   {"tau", o.tau},
                        {"tau_max", o.tau_max},   {"t_phi", o.t_phi},     {"omega", o.omega},
                        {"b", o.b},               {"tau_c", o.tau_c},     {"grid", o.grid},
                        {"trials", o.trials},     {"n_max", o.n_max},     {"seed", o.seed},
                        {"lsq_points", o.lsq_points}, {"shots", o.shots},
                        {"repetitions", o.repetitions}, {"full_lattice", o.full_lattice}};
  std::vector<std::string> files;
  for (const auto& f : result.files) files.push_back(f.filename().string());
  manifest["outputs"] = files;
  manifest["summary"] = result.summary;
  manifest["exit_code"] = result.status;
  std::ofstream file(fs::path(o.out_dir) / "manifest.json", std::ios::binary | std::ios::trunc);
  file << manifest.dump(2) << '\n';
}

void add_options(CLI::App& app, Options& o) {
  const auto positive = CLI::PositiveNumber;
  app.add_option("--protocol", o.protocol, "readout protocol")
      ->check(CLI::IsMember({"echo", "free"}))
      ->capture_default_str();
  app.add_option("--scheme", o.scheme, "sensing scheme for simulate")
      ->check(CLI::IsMember({"repeated", "adaptive-cfi", "adaptive-lo", "lsq"}))
      ->capture_default_str();
  app.add_option("--param", o.param, "parameter for fisher sweeps")
      ->check(CLI::IsMember({"tphi", "omega", "b", "tau_c"}))
      ->capture_default_str();
  app.add_option("--tau", o.tau, "fixed evolution time (repeated scheme, demo-omega)")
      ->capture_default_str();
  app.add_option("--tau-max", o.tau_max, "upper end of the tau range")->capture_default_str();
  app.add_option("--t-phi", o.t_phi, "true dephasing time")->capture_default_str();
  app.add_option("--omega", o.omega, "Larmor angular frequency")->capture_default_str();
  app.add_option("--b", o.b, "OU noise amplitude")->capture_default_str();
  app.add_option("--tau-c", o.tau_c, "OU noise memory time")->capture_default_str();
  app.add_option("--grid", o.grid, "points of the parameter grid")->check(positive)
      ->capture_default_str();
  app.add_option("--resolution", o.resolution, "points of the tau (or omega) sweep")
      ->check(positive)
      ->capture_default_str();
  app.add_option("--trials", o.trials, "Monte Carlo trials")->capture_default_str();
  app.add_option("--n-max", o.n_max, "measurement cycles per trial")->capture_default_str();
  app.add_option("--lsq-points", o.lsq_points, "least-squares grid points M")->capture_default_str();
  app.add_option("--shots", o.shots, "shots per least-squares point")->capture_default_str();
  app.add_option("--repetitions", o.repetitions, "repeated least-squares fits")
      ->capture_default_str();
  app.add_option("--max-fit-failure-rate", o.max_fit_failure_rate,
                 "fit failure rate above which the exit status is 4")
      ->capture_default_str();
  app.add_option("--seed", o.seed, "master seed")->capture_default_str();
  app.add_option("--outcomes", o.outcomes, "outcome string for demo-omega, e.g. ++-")
      ->capture_default_str();
  app.add_option("--omega-max", o.omega_max, "upper end of the omega grid (demo-omega)");
  app.add_flag("--full-lattice", o.full_lattice,
               "adaptive-lo with free evolution: score every n pi / omega candidate");
  app.add_option("--out", o.out_dir, "output directory")->capture_default_str();
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive sensing of dephasing noise: Fisher information, simulation, fitting"};
  app.name("noisescope");
  app.set_config("--config", "", "INI file with option = value lines; flags override it");
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  add_options(app, o);
  auto* fisher = app.add_subcommand("fisher", "tabulate CFI and QFI against tau");
  auto* simulate = app.add_subcommand("simulate", "precision curve of a sensing scheme");
  auto* fit = app.add_subcommand("fit", "repeated least-squares fits of simulated decay data");
  auto* repro = app.add_subcommand("reproduce", "write the datasets of one figure");
  repro->add_option("figure", o.figure, "figure id")
      ->required()
      ->check(CLI::IsMember(std::vector<std::string>(std::begin(kFigureIds), std::end(kFigureIds))));
  auto* demo = app.add_subcommand("demo-omega", "posterior of omega showing periodic peaks");

  std::vector<std::string> argv_storage{"noisescope"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsageError;
  }

  std::string command;
  try {
    Outputs result;
    if (fisher->parsed()) {
      command = "fisher";
      result = cmd_fisher(o, out);
    } else if (simulate->parsed()) {
      command = "simulate";
      result = cmd_simulate(o, out);
    } else if (fit->parsed()) {
      command = "fit";
      result = cmd_fit(o, out);
    } else if (repro->parsed()) {
      command = "reproduce";
      result = cmd_reproduce(o, out);
    } else if (demo->parsed()) {
      command = "demo-omega";
      result = cmd_demo_omega(o, out);
    }
    write_manifest(command, o, result, args);
    if (result.status == kFitFailure) {
      err << "error: fit failure rate exceeds " << o.max_fit_failure_rate << '\n';
    }
    return result.status;
  } catch (const FitFailure& e) {
    err << "error: " << e.what() << '\n';
    return kFitFailure;
  } catch (const ConfigError& e) {
    err << "invalid configuration: " << e.what() << '\n';
    return kValidationError;
  } catch (const DomainError& e) {
    err << "invalid configuration: " << e.what() << '\n';
    return kValidationError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

}  // namespace noisescope::cli
