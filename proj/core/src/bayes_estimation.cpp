#include "noisescope/bayes_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "noisescope/csv.hpp"
#include "noisescope/errors.hpp"

namespace noisescope {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Log weight assigned (relative to the maximum) to points with zero likelihood.
constexpr double kZeroLikelihoodLog = -1.0e4;
// Points this far below the maximum carry < 1e-17 of the mass each.
constexpr double kNegligibleLog = 40.0;

}  // namespace

PosteriorGrid::PosteriorGrid(double lower, double upper, std::size_t size) {
  if (!(upper > lower) || !std::isfinite(lower) || !std::isfinite(upper)) {
    throw ConfigError("parameter range must be non-empty and finite");
  }
  if (size < 2) throw ConfigError("parameter grid needs at least 2 points");
  step_ = (upper - lower) / static_cast<double>(size - 1);
  values_.resize(size);
  for (std::size_t i = 0; i < size; ++i) values_[i] = lower + static_cast<double>(i) * step_;
  values_.back() = upper;
  log_weights_.assign(size, -std::log(static_cast<double>(size)));
}

PosteriorGrid PosteriorGrid::flat(double lower, double upper, std::size_t size) {
  return PosteriorGrid(lower, upper, size);
}

PosteriorGrid PosteriorGrid::gaussian(double lower, double upper, std::size_t size, double center,
                                      double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("gaussian prior needs sigma > 0");
  PosteriorGrid grid(lower, upper, size);
  for (std::size_t i = 0; i < size; ++i) {
    const double z = (grid.values_[i] - center) / sigma;
    grid.log_weights_[i] = -0.5 * z * z;
  }
  grid.normalize();
  return grid;
}

double PosteriorGrid::log_of(double likelihood) {
  if (!(likelihood >= 0.0) || likelihood > 1.0 + 1e-12) {
    throw DomainError("likelihood must lie in [0, 1]");
  }
  return likelihood == 0.0 ? kNegInf : std::log(likelihood);
}

void PosteriorGrid::update_log(std::span<const double> log_likelihood) {
  if (log_likelihood.size() != values_.size()) {
    throw DomainError("likelihood size does not match the grid");
  }
  double top = kNegInf;
  bool any_zero = false;
  for (std::size_t i = 0; i < log_weights_.size(); ++i) {
    if (log_likelihood[i] == kNegInf) {
      any_zero = true;
      continue;
    }
    top = std::max(top, log_weights_[i] + log_likelihood[i]);
  }
  if (top == kNegInf) throw InconsistentDataError("observed outcome has zero likelihood everywhere");

  for (std::size_t i = 0; i < log_weights_.size(); ++i) {
    if (any_zero && log_likelihood[i] == kNegInf) {
      log_weights_[i] = std::min(log_weights_[i], top + kZeroLikelihoodLog);
    } else {
      log_weights_[i] += log_likelihood[i];
    }
  }
  normalize();
}

void PosteriorGrid::normalize() {
  const double top = *std::max_element(log_weights_.begin(), log_weights_.end());
  double sum = 0.0;
  for (double lw : log_weights_) {
    const double rel = lw - top;
    if (rel > -kNegligibleLog) sum += std::exp(rel);
  }
  const double shift = top + std::log(sum);
  for (double& lw : log_weights_) lw -= shift;
}

std::vector<double> PosteriorGrid::masses() const {
  std::vector<double> out(log_weights_.size());
  std::transform(log_weights_.begin(), log_weights_.end(), out.begin(),
                 [](double lw) { return std::exp(lw); });
  return out;
}

std::size_t PosteriorGrid::argmax() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < log_weights_.size(); ++i) {
    if (log_weights_[i] > log_weights_[best]) best = i;
  }
  return best;
}

std::pair<std::size_t, std::size_t> PosteriorGrid::support(double log_cutoff) const {
  const double floor = log_weights_[argmax()] - log_cutoff;
  std::size_t first = 0;
  while (log_weights_[first] < floor) ++first;
  std::size_t last = log_weights_.size();
  while (log_weights_[last - 1] < floor) --last;
  return {first, last};
}

double PosteriorGrid::boundary_mass(std::size_t cells) const {
  cells = std::min(cells, size() / 2);
  double mass = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    mass += std::exp(log_weights_[i]) + std::exp(log_weights_[size() - 1 - i]);
  }
  return mass;
}

bool PosteriorGrid::is_flat() const {
  const auto [lo, hi] = std::minmax_element(log_weights_.begin(), log_weights_.end());
  return *hi - *lo < 1e-12;
}

PosteriorGrid init_prior(const PriorSpec& spec) {
  switch (spec.kind) {
    case PriorSpec::Kind::Flat:
      return PosteriorGrid::flat(spec.lower, spec.upper, spec.grid_size);
    case PriorSpec::Kind::Gaussian:
      return PosteriorGrid::gaussian(spec.lower, spec.upper, spec.grid_size, spec.center, spec.sigma);
  }
  throw ConfigError("unknown prior kind");
}

OutcomeLogLikelihoods dephasing_log_likelihoods(const PosteriorGrid& grid, const Protocol& protocol,
                                                double tau) {
  const double contrast = signal_contrast(protocol, tau);
  OutcomeLogLikelihoods out;
  out.plus.resize(grid.size());
  out.minus.resize(grid.size());
  const auto values = grid.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double signal = contrast * std::exp(-tau / values[i]);
    const double p_plus = 0.5 * (1.0 + signal);
    const double p_minus = 0.5 * (1.0 - signal);
    out.plus[i] = p_plus > 0.0 ? std::log(p_plus) : kNegInf;
    out.minus[i] = p_minus > 0.0 ? std::log(p_minus) : kNegInf;
  }
  return out;
}

void dephasing_log_likelihood(const PosteriorGrid& grid, const Protocol& protocol, double tau,
                              int outcome, std::vector<double>& out) {
  const double signed_contrast = (outcome > 0 ? 1.0 : -1.0) * signal_contrast(protocol, tau);
  const auto values = grid.values();
  out.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double p = 0.5 * (1.0 + signed_contrast * std::exp(-tau / values[i]));
    out[i] = p > 0.0 ? std::log(p) : kNegInf;
  }
}

Estimate mle(const PosteriorGrid& post) {
  const auto lw = post.log_weights();
  const auto x = post.values();
  const std::size_t i = post.argmax();
  const auto ties = std::count(lw.begin(), lw.end(), lw[i]);

  Estimate est{x[i], 0.0, EstimateKind::MaximumLikelihood, ties == 1, false};
  if (est.unique && i > 0 && i + 1 < lw.size()) {
    const double left = lw[i - 1];
    const double right = lw[i + 1];
    const double curvature = left - 2.0 * lw[i] + right;
    if (curvature < 0.0) {
      const double offset = 0.5 * (left - right) / curvature;
      est.point += std::clamp(offset, -0.5, 0.5) * post.step();
    }
  }
  return est;
}

double posterior_uncertainty(const PosteriorGrid& post, double center) {
  const auto lw = post.log_weights();
  const auto x = post.values();
  const auto [first, last] = post.support(kNegligibleLog);
  double acc = 0.0;
  for (std::size_t i = first; i < last; ++i) {
    const double d = x[i] - center;
    acc += std::exp(lw[i]) * d * d;
  }
  return std::sqrt(acc);
}

Estimate posterior_mean(const PosteriorGrid& post) {
  const auto lw = post.log_weights();
  const auto x = post.values();
  const auto [first, last] = post.support(kNegligibleLog);
  double mean = 0.0;
  for (std::size_t i = first; i < last; ++i) mean += std::exp(lw[i]) * x[i];
  return Estimate{mean, posterior_uncertainty(post, mean), EstimateKind::BayesMean, true, false};
}

Estimate mle_with_uncertainty(const PosteriorGrid& post) {
  Estimate est = mle(post);
  est.uncertainty = posterior_uncertainty(post, est.point);
  return est;
}

Estimate inversion_estimator(const Protocol& protocol, double tau, long n_plus, long n_minus) {
  if (n_plus < 0 || n_minus < 0 || n_plus + n_minus < 1) {
    throw DomainError("inversion estimator needs at least one outcome");
  }
  if (!(tau > 0.0)) throw DomainError("evolution time must be > 0");
  const double n = static_cast<double>(n_plus + n_minus);
  const double contrast = signal_contrast(protocol, tau);
  const double decay = (static_cast<double>(n_plus - n_minus) / n) / contrast;
  if (!(decay > 0.0)) throw OutOfModelError("observed contrast is exhausted (N+ - N- <= 0)");
  if (decay >= 1.0) {
    return Estimate{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                    EstimateKind::Inversion, true, true};
  }
  const double t_phi = -tau / std::log(decay);
  const double spread = crb_precision(cfi_tphi(protocol, tau, t_phi).value, n_plus + n_minus);
  return Estimate{t_phi, spread, EstimateKind::Inversion, true, false};
}

double crb_precision(double fisher, long n) {
  if (n < 1) throw DomainError("need at least one measurement");
  if (!(fisher >= 0.0)) throw DomainError("Fisher information must be >= 0");
  if (fisher == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / std::sqrt(static_cast<double>(n) * fisher);
}

void write_posterior_csv(std::ostream& out, const PosteriorGrid& post) {
  CsvTable table({"param", "probability_mass"});
  const auto x = post.values();
  const auto lw = post.log_weights();
  for (std::size_t i = 0; i < x.size(); ++i) table.add_row({x[i], std::exp(lw[i])});
  table.write_rows(out);
}

}  // namespace noisescope
