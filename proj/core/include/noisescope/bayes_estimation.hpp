#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "noisescope/fisher_info.hpp"
#include "noisescope/spin_dynamics.hpp"

namespace noisescope {

enum class EstimateKind { MaximumLikelihood, BayesMean, Inversion, LeastSquares };

struct Estimate {
  double point = 0.0;
  double uncertainty = 0.0;
  EstimateKind kind = EstimateKind::MaximumLikelihood;
  bool unique = true;     ///< false when the peak is not unique (flat posterior)
  bool infinite = false;  ///< true when the data show no decay at all
};

/// Prior shape on the parameter grid.
struct PriorSpec {
  enum class Kind { Flat, Gaussian };

  double lower = 0.05;
  double upper = 10.0;
  std::size_t grid_size = 2000;
  Kind kind = Kind::Flat;
  double center = 1.0;  ///< Gaussian only
  double sigma = 0.1;   ///< Gaussian only
};

/// Discretised probability distribution over one parameter on a uniform grid.
/// Weights are stored as log point masses normalised so that
/// sum(exp(log_weights)) == 1.
class PosteriorGrid {
 public:
  /// Throws ConfigError for an empty range or fewer than 2 points.
  static PosteriorGrid flat(double lower, double upper, std::size_t size);
  static PosteriorGrid gaussian(double lower, double upper, std::size_t size, double center,
                                double sigma);

  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] double lower() const { return values_.front(); }
  [[nodiscard]] double upper() const { return values_.back(); }
  [[nodiscard]] double step() const { return step_; }
  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] std::span<const double> log_weights() const { return log_weights_; }

  /// Multiplies by a likelihood given in log form on the grid, then renormalises.
  /// Throws InconsistentDataError if every entry is -inf.
  void update_log(std::span<const double> log_likelihood);

  /// Multiplies by likelihood(value) in [0, 1] evaluated at every grid point.
  template <class Likelihood>
  void update(Likelihood&& likelihood) {
    scratch_.resize(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) scratch_[i] = log_of(likelihood(values_[i]));
    update_log(scratch_);
  }

  /// Point masses exp(log_weights).
  [[nodiscard]] std::vector<double> masses() const;

  /// Index range [first, last) holding every point whose log weight is within
  /// `log_cutoff` of the maximum; the rest carries negligible mass.
  [[nodiscard]] std::pair<std::size_t, std::size_t> support(double log_cutoff = 40.0) const;

  /// Index of the largest weight (lowest index on ties).
  [[nodiscard]] std::size_t argmax() const;

  /// Mass within the outer `cells` points at each end.
  [[nodiscard]] double boundary_mass(std::size_t cells = 2) const;

  [[nodiscard]] bool is_flat() const;

 private:
  PosteriorGrid(double lower, double upper, std::size_t size);
  static double log_of(double likelihood);
  void normalize();

  std::vector<double> values_;
  std::vector<double> log_weights_;
  std::vector<double> scratch_;
  double step_ = 0.0;
};

PosteriorGrid init_prior(const PriorSpec& spec);

/// Applies `likelihood` (parameter -> probability of the observed outcome).
/// Throws InconsistentDataError if it vanishes on the whole grid.
template <class Likelihood>
PosteriorGrid bayes_update(PosteriorGrid post, Likelihood&& likelihood) {
  post.update(std::forward<Likelihood>(likelihood));
  return post;
}

/// Log-likelihoods of outcome +1 and -1 on the grid of T_phi values for one
/// evolution time.
struct OutcomeLogLikelihoods {
  std::vector<double> plus;
  std::vector<double> minus;

  [[nodiscard]] std::span<const double> for_outcome(int outcome) const {
    return outcome > 0 ? std::span<const double>(plus) : std::span<const double>(minus);
  }
};

OutcomeLogLikelihoods dephasing_log_likelihoods(const PosteriorGrid& grid, const Protocol& protocol,
                                                double tau);

/// Single-outcome variant writing into a reusable buffer.
void dephasing_log_likelihood(const PosteriorGrid& grid, const Protocol& protocol, double tau,
                              int outcome, std::vector<double>& out);

/// Grid argmax refined by a parabola through the log weights of its
/// neighbours. `unique` is false when several points share the maximum.
Estimate mle(const PosteriorGrid& post);

/// Posterior mean; `uncertainty` is the spread about the mean.
Estimate posterior_mean(const PosteriorGrid& post);

/// sqrt(sum_i m_i (x_i - center)^2).
double posterior_uncertainty(const PosteriorGrid& post, double center);

/// MLE with its posterior spread as uncertainty.
Estimate mle_with_uncertainty(const PosteriorGrid& post);

/// Closed-form estimator from outcome counts at one evolution time: solves
/// contrast * exp(-tau/T) = (N+ - N-)/N. Throws OutOfModelError for
/// non-positive normalised contrast; returns `infinite` when it equals 1.
Estimate inversion_estimator(const Protocol& protocol, double tau, long n_plus, long n_minus);

/// Cramer-Rao precision 1/sqrt(N F); +inf when F == 0.
double crb_precision(double fisher, long n);

/// Writes "param,probability_mass" rows.
void write_posterior_csv(std::ostream& out, const PosteriorGrid& post);

}  // namespace noisescope
