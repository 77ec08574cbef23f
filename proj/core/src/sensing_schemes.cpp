#include "noisescope/sensing_schemes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <ostream>

#include <boost/math/tools/minima.hpp>

#include "noisescope/csv.hpp"
#include "noisescope/errors.hpp"
#include "noisescope/fisher_info.hpp"

namespace noisescope {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Grid points more than this many log units below the peak hold < 1e-13 of
// the mass each and are skipped when scoring candidate times.
constexpr double kScoringLogCutoff = 30.0;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " must be > 0");
}

// Walks a sorted checkpoint list alongside the cycle counter.
class RecordCursor {
 public:
  explicit RecordCursor(const RecordPolicy& policy) : policy_(policy) {}

  bool wants(std::size_t cycle) {
    if (policy_.checkpoints.empty()) return true;
    while (next_ < policy_.checkpoints.size() && policy_.checkpoints[next_] < cycle) ++next_;
    return next_ < policy_.checkpoints.size() && policy_.checkpoints[next_] == cycle;
  }

 private:
  const RecordPolicy& policy_;
  std::size_t next_ = 0;
};

double current_estimate(const PosteriorGrid& post, RandomStream& rng) {
  const Estimate est = mle(post);
  if (est.unique) return est.point;
  // No usable peak yet: pick T_M at random within the prior range.
  return rng.uniform(post.lower(), post.upper());
}

}  // namespace

void SchemeConfig::validate() const {
  std::visit(Overloaded{
                 [](const RepeatedScheme& s) { require_positive(s.tau, "tau"); },
                 [](const AdaptiveCfiScheme&) {},
                 [](const AdaptiveLocallyOptimalScheme& s) {
                   if (s.candidates < 2) throw ConfigError("need at least 2 candidate taus");
                   require_positive(s.lower_factor, "candidate lower factor");
                   if (!(s.upper_factor > s.lower_factor)) {
                     throw ConfigError("candidate upper factor must exceed the lower factor");
                   }
                 },
                 [](const LsqScheme& s) {
                   require_positive(s.tau_max, "tau_max");
                   if (s.grid_points < 2) throw ConfigError("LSQ needs M >= 2");
                   if (s.shots_per_point < 1) throw ConfigError("LSQ needs nu >= 1");
                   if (s.repetitions < 2) throw ConfigError("LSQ needs q >= 2");
                 },
             },
             scheme);
  if (!protocol.is_echo()) require_positive(protocol.omega, "omega");
  if (!(prior.upper > prior.lower) || !(prior.lower > 0.0)) {
    throw ConfigError("prior range must be a non-empty interval of positive times");
  }
  if (prior.grid_size < 2) throw ConfigError("prior grid needs at least 2 points");
}

RecordPolicy RecordPolicy::at(std::vector<std::size_t> cycles) {
  std::sort(cycles.begin(), cycles.end());
  cycles.erase(std::unique(cycles.begin(), cycles.end()), cycles.end());
  return RecordPolicy{std::move(cycles)};
}

TrialRecord run_repeated(const SchemeConfig& cfg, double true_t_phi, RandomStream& rng,
                         const RecordPolicy& policy) {
  const auto* scheme = std::get_if<RepeatedScheme>(&cfg.scheme);
  if (scheme == nullptr) throw ConfigError("run_repeated needs a repeated scheme");
  cfg.validate();

  const PosteriorGrid prior = init_prior(cfg.prior);
  TrialRecord record{{}, prior};
  const auto likelihoods = dephasing_log_likelihoods(prior, cfg.protocol, scheme->tau);
  const OutcomeDistribution truth = dephasing_outcome_probs(cfg.protocol, scheme->tau, true_t_phi);

  // With tau fixed the posterior depends only on the outcome counts, so it is
  // rebuilt from them when a record is due instead of updated every cycle.
  std::vector<double> combined(prior.size());
  auto posterior_from_counts = [&](long n_plus, long n_minus) {
    for (std::size_t i = 0; i < combined.size(); ++i) {
      const double lp = n_plus > 0 ? static_cast<double>(n_plus) * likelihoods.plus[i] : 0.0;
      const double lm = n_minus > 0 ? static_cast<double>(n_minus) * likelihoods.minus[i] : 0.0;
      combined[i] = lp + lm;
    }
    PosteriorGrid post = prior;
    post.update_log(combined);
    return post;
  };

  long n_plus = 0;
  long n_minus = 0;
  RecordCursor cursor(policy);
  for (std::size_t cycle = 1; cycle <= cfg.n_max; ++cycle) {
    const int outcome = sample_outcome(truth, rng);
    (outcome > 0 ? n_plus : n_minus) += 1;
    if (cursor.wants(cycle)) {
      const Estimate est = mle_with_uncertainty(posterior_from_counts(n_plus, n_minus));
      record.cycles.push_back({cycle, scheme->tau, outcome, est.point, est.uncertainty});
    }
  }
  if (cfg.n_max > 0) record.posterior = posterior_from_counts(n_plus, n_minus);
  return record;
}

TrialRecord run_adaptive(const SchemeConfig& cfg, AdaptiveVariant variant, double true_t_phi,
                         RandomStream& rng, const RecordPolicy& policy) {
  const auto* lo_scheme = std::get_if<AdaptiveLocallyOptimalScheme>(&cfg.scheme);
  if (variant == AdaptiveVariant::Cfi && !std::holds_alternative<AdaptiveCfiScheme>(cfg.scheme)) {
    throw ConfigError("CFI-based adaptive run needs an adaptive-cfi scheme");
  }
  if (variant == AdaptiveVariant::LocallyOptimal && lo_scheme == nullptr) {
    throw ConfigError("locally optimal adaptive run needs an adaptive-lo scheme");
  }
  cfg.validate();

  TrialRecord record{{}, init_prior(cfg.prior)};
  std::vector<double> log_likelihood;
  double t_m = current_estimate(record.posterior, rng);

  RecordCursor cursor(policy);
  for (std::size_t cycle = 1; cycle <= cfg.n_max; ++cycle) {
    double tau = 0.0;
    if (variant == AdaptiveVariant::Cfi) {
      tau = optimal_tau(cfg.protocol, t_m);
    } else {
      const auto candidates = candidate_taus(cfg.protocol, t_m, *lo_scheme);
      tau = locally_optimal_tau(record.posterior, cfg.protocol, t_m, candidates);
    }

    const int outcome = sample_outcome(dephasing_outcome_probs(cfg.protocol, tau, true_t_phi), rng);
    dephasing_log_likelihood(record.posterior, cfg.protocol, tau, outcome, log_likelihood);
    record.posterior.update_log(log_likelihood);

    const Estimate est = mle(record.posterior);
    t_m = est.unique ? est.point : rng.uniform(record.posterior.lower(), record.posterior.upper());
    if (cursor.wants(cycle)) {
      record.cycles.push_back(
          {cycle, tau, outcome, t_m, posterior_uncertainty(record.posterior, t_m)});
    }
  }
  return record;
}

TrialRecord run_trial(const SchemeConfig& cfg, double true_t_phi, RandomStream& rng,
                      const RecordPolicy& policy) {
  return std::visit(
      Overloaded{
          [&](const RepeatedScheme&) { return run_repeated(cfg, true_t_phi, rng, policy); },
          [&](const AdaptiveCfiScheme&) {
            return run_adaptive(cfg, AdaptiveVariant::Cfi, true_t_phi, rng, policy);
          },
          [&](const AdaptiveLocallyOptimalScheme&) {
            return run_adaptive(cfg, AdaptiveVariant::LocallyOptimal, true_t_phi, rng, policy);
          },
          [&](const LsqScheme&) -> TrialRecord {
            throw ConfigError("least-squares runs go through run_lsq");
          },
      },
      cfg.scheme);
}

ExpectedUncertainty::ExpectedUncertainty(const PosteriorGrid& post, const Protocol& protocol,
                                         double t_m)
    : protocol_(protocol), t_m_(t_m), step_(post.step()) {
  const auto [first, last] = post.support(kScoringLogCutoff);
  const auto lw = post.log_weights();
  const auto x = post.values();
  mass_.reserve(last - first);
  offset_.reserve(last - first);
  inv_value_.reserve(last - first);
  for (std::size_t i = first; i < last; ++i) {
    mass_.push_back(std::exp(lw[i]));
    offset_.push_back(x[i] - t_m);
    inv_value_.push_back(1.0 / x[i]);
    moment_[0] += mass_.back();
    moment_[1] += mass_.back() * offset_.back();
    moment_[2] += mass_.back() * offset_.back() * offset_.back();
  }
}

double ExpectedUncertainty::operator()(double tau) const {
  const double contrast = signal_contrast(protocol_, tau);
  const std::size_t n = mass_.size();

  // Outcome u has unnormalised weights m_i (1 + u s_i); its moments about T_M
  // are the tau-independent moments of m plus or minus those of m s.
  double b0 = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  double peak[2] = {-1.0, -1.0};
  std::size_t peak_at[2] = {0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const double ms = mass_[i] * contrast * std::exp(-tau * inv_value_[i]);
    const double d = offset_[i];
    b0 += ms;
    b1 += ms * d;
    b2 += ms * d * d;
    const double w_plus = mass_[i] + ms;
    const double w_minus = mass_[i] - ms;
    if (w_plus > peak[0]) {
      peak[0] = w_plus;
      peak_at[0] = i;
    }
    if (w_minus > peak[1]) {
      peak[1] = w_minus;
      peak_at[1] = i;
    }
  }
  const double s0[2] = {moment_[0] + b0, moment_[0] - b0};
  const double s1[2] = {moment_[1] + b1, moment_[1] - b1};
  const double s2[2] = {moment_[2] + b2, moment_[2] - b2};

  auto weight_at = [&](std::size_t i, int u) {
    const double signal = contrast * std::exp(-tau * inv_value_[i]);
    return mass_[i] * (1.0 + (u == 0 ? signal : -signal));
  };

  const OutcomeDistribution predicted = dephasing_outcome_probs(protocol_, tau, t_m_);
  const double p_outcome[2] = {predicted.p_plus, predicted.p_minus};
  double expected = 0.0;
  for (int u = 0; u < 2; ++u) {
    if (!(s0[u] > 0.0)) continue;
    // MLE of the hypothetical posterior, with the same parabolic refinement as mle().
    const std::size_t k = peak_at[u];
    double d_mle = offset_[k];
    if (k > 0 && k + 1 < n) {
      const double left = weight_at(k - 1, u);
      const double right = weight_at(k + 1, u);
      if (left > 0.0 && right > 0.0) {
        const double l0 = std::log(peak[u]);
        const double ll = std::log(left);
        const double lr = std::log(right);
        const double curvature = ll - 2.0 * l0 + lr;
        if (curvature < 0.0) d_mle += std::clamp(0.5 * (ll - lr) / curvature, -0.5, 0.5) * step_;
      }
    }
    const double variance = (s2[u] - 2.0 * d_mle * s1[u] + d_mle * d_mle * s0[u]) / s0[u];
    expected += p_outcome[u] * std::sqrt(std::max(variance, 0.0));
  }
  return expected;
}

double expected_uncertainty(const PosteriorGrid& post, double tau, const Protocol& protocol,
                            double t_m) {
  if (!(tau > 0.0)) throw DomainError("evolution time must be > 0");
  return ExpectedUncertainty(post, protocol, t_m)(tau);
}

double expected_uncertainty(const PosteriorGrid& post, double tau, const Protocol& protocol) {
  return expected_uncertainty(post, tau, protocol, mle(post).point);
}

std::vector<double> candidate_taus(const Protocol& protocol, double t_m,
                                   const AdaptiveLocallyOptimalScheme& scheme) {
  const double lo = scheme.lower_factor * t_m;
  const double hi = scheme.upper_factor * t_m;
  if (!protocol.is_echo() && scheme.full_lattice) {
    const double half_period = std::numbers::pi / protocol.omega;
    const auto first = std::max<std::int64_t>(1, std::llround(lo / half_period));
    const auto last = std::max<std::int64_t>(first, std::llround(hi / half_period));
    std::vector<double> taus;
    taus.reserve(static_cast<std::size_t>(last - first + 1));
    for (std::int64_t n = first; n <= last; ++n) taus.push_back(static_cast<double>(n) * half_period);
    return taus;
  }
  const std::size_t count = std::max<std::size_t>(scheme.candidates, 2);
  const double ratio = std::pow(hi / lo, 1.0 / static_cast<double>(count - 1));

  std::vector<double> taus;
  taus.reserve(count);
  double tau = lo;
  for (std::size_t i = 0; i < count; ++i, tau *= ratio) {
    if (protocol.is_echo()) {
      taus.push_back(tau);
    } else {
      const double half_period = std::numbers::pi / protocol.omega;
      const auto n = std::max<std::int64_t>(1, std::llround(tau / half_period));
      const double snapped = static_cast<double>(n) * half_period;
      if (taus.empty() || snapped > taus.back()) taus.push_back(snapped);
    }
  }
  return taus;
}

double locally_optimal_tau(const PosteriorGrid& post, const Protocol& protocol, double t_m,
                           std::span<const double> candidates) {
  if (candidates.empty()) throw ConfigError("no candidate evolution times");
  const ExpectedUncertainty score(post, protocol, t_m);
  double best_tau = candidates.front();
  double best = std::numeric_limits<double>::infinity();
  for (double tau : candidates) {
    const double s = score(tau);
    if (s < best) {
      best = s;
      best_tau = tau;
    }
  }
  return best_tau;
}

Estimate fit_decay(const Protocol& protocol, std::span<const DecaySample> samples) {
  if (samples.size() < 2) throw FitFailure("need at least two samples to fit");
  double tau_lo = std::numeric_limits<double>::infinity();
  double tau_hi = 0.0;
  for (const auto& s : samples) {
    if (!(s.tau > 0.0)) throw DomainError("fit samples need tau > 0");
    if (!(s.mean >= -1.0 && s.mean <= 1.0)) throw DomainError("sample means must lie in [-1, 1]");
    tau_lo = std::min(tau_lo, s.tau);
    tau_hi = std::max(tau_hi, s.tau);
  }

  // Residual sum of squares as a function of log T.
  auto sse = [&](double log_t) {
    const double inv_t = std::exp(-log_t);
    double acc = 0.0;
    for (const auto& s : samples) {
      const double r = s.mean - signal_contrast(protocol, s.tau) * std::exp(-s.tau * inv_t);
      acc += r * r;
    }
    return acc;
  };

  constexpr int kScanPoints = 241;
  const double scan_lo = std::log(1e-3 * tau_lo);
  const double scan_hi = std::log(1e3 * tau_hi);
  const double h = (scan_hi - scan_lo) / (kScanPoints - 1);
  int best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (int j = 0; j < kScanPoints; ++j) {
    const double v = sse(scan_lo + j * h);
    if (v < best_value) {
      best_value = v;
      best = j;
    }
  }
  if (best == 0 || best == kScanPoints - 1) {
    throw FitFailure("least-squares minimum is not bracketed within the scan range");
  }

  std::uintmax_t iters = 200;
  const auto [log_t, value] = boost::math::tools::brent_find_minima(
      sse, scan_lo + (best - 1) * h, scan_lo + (best + 1) * h, std::numeric_limits<double>::digits,
      iters);
  (void)value;
  return Estimate{std::exp(log_t), 0.0, EstimateKind::LeastSquares, true, false};
}

double lsq_grid_spacing(const Protocol& protocol, double tau_max, std::size_t grid_points) {
  const double uniform = tau_max / static_cast<double>(grid_points);
  if (protocol.is_echo()) return uniform;
  const double half_period = std::numbers::pi / protocol.omega;
  const auto n = std::max<std::int64_t>(1, std::llround(uniform / half_period));
  return static_cast<double>(n) * half_period;
}

double LsqResult::failure_rate() const {
  const auto total = fits.size() + failures;
  return total == 0 ? 0.0 : static_cast<double>(failures) / static_cast<double>(total);
}

LsqResult run_lsq(const SchemeConfig& cfg, double true_t_phi, RandomStream& rng) {
  const auto* scheme = std::get_if<LsqScheme>(&cfg.scheme);
  if (scheme == nullptr) throw ConfigError("run_lsq needs an LSQ scheme");
  cfg.validate();

  LsqResult result;
  result.grid_spacing = lsq_grid_spacing(cfg.protocol, scheme->tau_max, scheme->grid_points);
  result.measurements = scheme->grid_points * scheme->shots_per_point;

  std::vector<OutcomeDistribution> truth(scheme->grid_points);
  std::vector<DecaySample> samples(scheme->grid_points);
  for (std::size_t k = 0; k < scheme->grid_points; ++k) {
    samples[k].tau = static_cast<double>(k + 1) * result.grid_spacing;
    truth[k] = dephasing_outcome_probs(cfg.protocol, samples[k].tau, true_t_phi);
  }

  const double shots = static_cast<double>(scheme->shots_per_point);
  for (std::size_t rep = 0; rep < scheme->repetitions; ++rep) {
    for (std::size_t k = 0; k < scheme->grid_points; ++k) {
      long sum = 0;
      for (std::size_t s = 0; s < scheme->shots_per_point; ++s) sum += sample_outcome(truth[k], rng);
      samples[k].mean = static_cast<double>(sum) / shots;
    }
    try {
      result.fits.push_back(fit_decay(cfg.protocol, samples).point);
    } catch (const FitFailure&) {
      ++result.failures;
    }
  }
  if (result.fits.size() < 2) throw FitFailure("fewer than two least-squares fits succeeded");

  const double q = static_cast<double>(result.fits.size());
  double mean = 0.0;
  for (double t : result.fits) mean += t;
  mean /= q;
  double var = 0.0;
  for (double t : result.fits) var += (t - mean) * (t - mean);
  result.estimate = Estimate{mean, std::sqrt(var / q), EstimateKind::LeastSquares, true, false};
  return result;
}

void write_trial_csv(std::ostream& out, const TrialRecord& record) {
  CsvTable table({"cycle", "tau", "outcome", "estimate", "uncertainty"});
  for (const auto& c : record.cycles) {
    table.add_row(std::vector<CsvCell>{static_cast<std::int64_t>(c.cycle), c.tau, static_cast<std::int64_t>(c.outcome),
                   c.estimate, c.uncertainty});
  }
  table.write_rows(out);
}

}  // namespace noisescope
