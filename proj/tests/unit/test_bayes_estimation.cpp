#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "noisescope/bayes_estimation.hpp"
#include "noisescope/errors.hpp"
#include "noisescope/random.hpp"

namespace noisescope {
namespace {

double total_mass(const PosteriorGrid& post) {
  const auto m = post.masses();
  return std::accumulate(m.begin(), m.end(), 0.0);
}

double p_plus(const Protocol& protocol, double tau, double t) {
  return dephasing_outcome_probs(protocol, tau, t).p_plus;
}

TEST(PosteriorGrid, FlatPriorIsUniformAndNormalised) {
  const auto post = PosteriorGrid::flat(0.5, 2.5, 201);
  EXPECT_EQ(post.size(), 201u);
  EXPECT_DOUBLE_EQ(post.lower(), 0.5);
  EXPECT_DOUBLE_EQ(post.upper(), 2.5);
  EXPECT_NEAR(post.step(), 0.01, 1e-15);
  EXPECT_NEAR(total_mass(post), 1.0, 1e-13);
  EXPECT_TRUE(post.is_flat());
  EXPECT_FALSE(mle(post).unique);
  EXPECT_NEAR(posterior_mean(post).point, 1.5, 1e-12);
}

TEST(PosteriorGrid, GaussianPriorPeaksAtCentre) {
  const auto post = PosteriorGrid::gaussian(0.9, 1.1, 2001, 1.0, 0.01);
  EXPECT_NEAR(total_mass(post), 1.0, 1e-13);
  const auto est = mle_with_uncertainty(post);
  EXPECT_TRUE(est.unique);
  EXPECT_NEAR(est.point, 1.0, 1e-12);
  EXPECT_NEAR(est.uncertainty, 0.01, 1e-6);
  EXPECT_NEAR(posterior_mean(post).point, 1.0, 1e-12);
}

TEST(PosteriorGrid, SingleUpdateFollowsBayesRule) {
  const auto echo = Protocol::spin_echo();
  const double tau = 0.8;
  auto post = PosteriorGrid::flat(0.1, 5.0, 50);
  const auto prior = post;
  post.update([&](double t) { return p_plus(echo, tau, t); });

  const auto x = post.values();
  double evidence = 0.0;
  for (double t : x) evidence += p_plus(echo, tau, t) / 50.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double expected = (1.0 / 50.0) * p_plus(echo, tau, x[i]) / evidence;
    EXPECT_NEAR(std::exp(post.log_weights()[i]), expected, 1e-14);
  }
  // Ratio of posterior weights equals the likelihood ratio.
  const double ratio = std::exp(post.log_weights()[3] - post.log_weights()[40]);
  EXPECT_NEAR(ratio, p_plus(echo, tau, x[3]) / p_plus(echo, tau, x[40]), 1e-12);
  EXPECT_TRUE(prior.is_flat());
}

TEST(PosteriorGrid, SequentialUpdatesEqualBatchProduct) {
  const auto protocol = Protocol::free_evolution(20.0);
  RandomStream rng(5);
  auto sequential = PosteriorGrid::flat(0.05, 4.0, 400);
  std::vector<double> batch(400, 0.0);
  const auto x = sequential.values();
  std::vector<double> scratch;
  for (int k = 0; k < 60; ++k) {
    const double tau = rng.uniform(0.05, 2.0);
    const int u = rng.uniform() < 0.5 ? 1 : -1;
    dephasing_log_likelihood(sequential, protocol, tau, u, scratch);
    sequential.update_log(scratch);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double p = p_plus(protocol, tau, x[i]);
      batch[i] += std::log(u > 0 ? p : 1.0 - p);
    }
  }
  auto once = PosteriorGrid::flat(0.05, 4.0, 400);
  once.update_log(batch);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(sequential.log_weights()[i], once.log_weights()[i],
                1e-9 * (1.0 + std::abs(once.log_weights()[i])));
  }
}

TEST(PosteriorGrid, LogLikelihoodTablesAgree) {
  const auto grid = PosteriorGrid::flat(0.2, 3.0, 30);
  const auto protocol = Protocol::free_evolution(6.0);
  const auto both = dephasing_log_likelihoods(grid, protocol, 0.9);
  std::vector<double> plus;
  std::vector<double> minus;
  dephasing_log_likelihood(grid, protocol, 0.9, 1, plus);
  dephasing_log_likelihood(grid, protocol, 0.9, -1, minus);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_DOUBLE_EQ(both.plus[i], plus[i]);
    EXPECT_DOUBLE_EQ(both.minus[i], minus[i]);
    EXPECT_NEAR(std::exp(plus[i]) + std::exp(minus[i]), 1.0, 1e-14);
  }
  EXPECT_EQ(both.for_outcome(1).data(), both.plus.data());
  EXPECT_EQ(both.for_outcome(-1).data(), both.minus.data());
}

TEST(PosteriorGrid, ZeroLikelihoodCellsAreSuppressedNotErased) {
  auto post = PosteriorGrid::flat(1.0, 2.0, 11);
  post.update([](double t) { return t < 1.5 ? 0.0 : 0.5; });
  EXPECT_GT(post.values()[post.argmax()], 1.45);
  EXPECT_LT(std::exp(post.log_weights()[0]), 1e-20);
  EXPECT_TRUE(std::isfinite(post.log_weights()[0]));
  EXPECT_THROW(post.update([](double) { return 0.0; }), InconsistentDataError);
}

TEST(PosteriorGrid, RejectsInvalidInput) {
  EXPECT_THROW(PosteriorGrid::flat(1.0, 1.0, 10), ConfigError);
  EXPECT_THROW(PosteriorGrid::flat(0.0, 1.0, 1), ConfigError);
  EXPECT_THROW(PosteriorGrid::gaussian(0.0, 1.0, 10, 0.5, 0.0), ConfigError);
  auto post = PosteriorGrid::flat(0.5, 1.5, 10);
  EXPECT_THROW(post.update([](double) { return 1.5; }), DomainError);
  EXPECT_THROW(post.update_log(std::vector<double>(9, 0.0)), DomainError);
}

TEST(PosteriorGrid, SupportAndBoundaryMass) {
  const auto post = PosteriorGrid::gaussian(0.5, 1.5, 1001, 1.0, 0.02);
  const auto [first, last] = post.support(0.5 * 3.0 * 3.0);
  // Cells within three standard deviations of the centre.
  EXPECT_NEAR(post.values()[first], 0.94, 1.5e-3);
  EXPECT_NEAR(post.values()[last - 1], 1.06, 1.5e-3);
  EXPECT_LT(post.boundary_mass(), 1e-100);
  const auto flat = PosteriorGrid::flat(0.5, 1.5, 100);
  EXPECT_NEAR(flat.boundary_mass(2), 0.04, 1e-12);
}

TEST(Estimators, MleRefinesBetweenGridPoints) {
  // A Gaussian centred between grid points: the parabolic refinement is exact
  // for a quadratic log-density.
  const auto post = PosteriorGrid::gaussian(0.5, 1.5, 101, 1.0037, 0.05);
  EXPECT_NEAR(mle(post).point, 1.0037, 1e-12);
}

TEST(Estimators, InversionEstimator) {
  const auto echo = Protocol::spin_echo();
  const auto est = inversion_estimator(echo, 0.8, 80, 20);
  EXPECT_NEAR(est.point, -0.8 / std::log(0.6), 1e-14);
  EXPECT_NEAR(est.uncertainty, 1.0 / std::sqrt(100.0 * qfi_tphi(0.8, est.point)), 1e-14);
  EXPECT_EQ(est.kind, EstimateKind::Inversion);

  const auto none = inversion_estimator(echo, 0.8, 10, 0);
  EXPECT_TRUE(none.infinite);
  EXPECT_TRUE(std::isinf(none.point));
  EXPECT_THROW(inversion_estimator(echo, 0.8, 5, 5), OutOfModelError);
  EXPECT_THROW(inversion_estimator(echo, 0.8, 0, 0), DomainError);
  EXPECT_THROW(inversion_estimator(echo, 0.0, 3, 1), DomainError);

  // Free evolution divides out the cosine fringe.
  const auto free = Protocol::free_evolution(2.0);
  const double tau = 1.5 * std::numbers::pi;  // cos(omega tau) = -1
  const auto flipped = inversion_estimator(free, tau, 20, 80);
  EXPECT_NEAR(flipped.point, -tau / std::log(0.6), 1e-12);
}

TEST(Estimators, CramerRaoPrecision) {
  EXPECT_DOUBLE_EQ(crb_precision(0.16, 100), 0.25);
  EXPECT_TRUE(std::isinf(crb_precision(0.0, 10)));
  EXPECT_THROW(crb_precision(1.0, 0), DomainError);
  EXPECT_THROW(crb_precision(-1.0, 1), DomainError);
}

TEST(Estimators, PosteriorConcentratesAtTruth) {
  const auto echo = Protocol::spin_echo();
  RandomStream rng(12);
  auto post = PosteriorGrid::flat(0.05, 5.0, 1000);
  std::vector<double> ll;
  const double truth = 1.3;
  for (int k = 0; k < 4000; ++k) {
    const double tau = 0.8 * truth;
    const int u = sample_outcome(dephasing_outcome_probs(echo, tau, truth), rng);
    dephasing_log_likelihood(post, echo, tau, u, ll);
    post.update_log(ll);
  }
  const auto est = mle_with_uncertainty(post);
  const double crb = crb_precision(qfi_tphi(0.8 * truth, truth), 4000);
  EXPECT_NEAR(est.point, truth, 5.0 * crb);
  EXPECT_NEAR(est.uncertainty, crb, 0.2 * crb);
}

TEST(Estimators, WritesPosteriorCsv) {
  std::ostringstream out;
  write_posterior_csv(out, PosteriorGrid::flat(1.0, 2.0, 2));
  EXPECT_EQ(out.str(), "param,probability_mass\n1,0.5\n2,0.5\n");
}

}  // namespace
}  // namespace noisescope
