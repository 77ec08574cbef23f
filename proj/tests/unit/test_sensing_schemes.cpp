#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "noisescope/errors.hpp"
#include "noisescope/sensing_schemes.hpp"

namespace noisescope {
namespace {

constexpr double kPi = std::numbers::pi;

SchemeConfig small_config(Scheme scheme, Protocol protocol = Protocol::spin_echo()) {
  SchemeConfig cfg;
  cfg.scheme = scheme;
  cfg.protocol = protocol;
  cfg.prior = PriorSpec{0.05, 5.0, 400};
  cfg.n_max = 150;
  return cfg;
}

// Rebuilds the posterior from the recorded (tau, outcome) pairs one cycle at a time.
PosteriorGrid replay(const SchemeConfig& cfg, const TrialRecord& record) {
  PosteriorGrid post = init_prior(cfg.prior);
  std::vector<double> ll;
  for (const auto& c : record.cycles) {
    dephasing_log_likelihood(post, cfg.protocol, c.tau, c.outcome, ll);
    post.update_log(ll);
  }
  return post;
}

// Direct evaluation: update a copy for each outcome and take the spread about its MLE.
double brute_force_expected_uncertainty(const PosteriorGrid& post, double tau,
                                        const Protocol& protocol, double t_m) {
  const auto predicted = dephasing_outcome_probs(protocol, tau, t_m);
  double acc = 0.0;
  for (int u : {1, -1}) {
    PosteriorGrid hypo = post;
    std::vector<double> ll;
    dephasing_log_likelihood(hypo, protocol, tau, u, ll);
    hypo.update_log(ll);
    const double spread = posterior_uncertainty(hypo, mle(hypo).point);
    acc += (u > 0 ? predicted.p_plus : predicted.p_minus) * spread;
  }
  return acc;
}

TEST(SchemeConfig, Validation) {
  EXPECT_NO_THROW(small_config(AdaptiveCfiScheme{}).validate());
  EXPECT_THROW(small_config(RepeatedScheme{0.0}).validate(), ConfigError);
  EXPECT_THROW(small_config(AdaptiveLocallyOptimalScheme{1, 0.1, 2.0}).validate(), ConfigError);
  EXPECT_THROW(small_config(AdaptiveLocallyOptimalScheme{10, 2.0, 1.0}).validate(), ConfigError);
  EXPECT_THROW(small_config(LsqScheme{10.0, 1, 10, 10}).validate(), ConfigError);
  EXPECT_THROW(small_config(LsqScheme{10.0, 10, 0, 10}).validate(), ConfigError);
  EXPECT_THROW(small_config(LsqScheme{10.0, 10, 10, 1}).validate(), ConfigError);
  auto bad_prior = small_config(AdaptiveCfiScheme{});
  bad_prior.prior.lower = 0.0;
  EXPECT_THROW(bad_prior.validate(), ConfigError);
  bad_prior.prior = PriorSpec{0.1, 2.0, 1};
  EXPECT_THROW(bad_prior.validate(), ConfigError);
}

TEST(SchemeConfig, RecordPolicySortsAndDeduplicates) {
  const auto policy = RecordPolicy::at({10, 1, 5, 5, 2});
  EXPECT_EQ(policy.checkpoints, (std::vector<std::size_t>{1, 2, 5, 10}));
  EXPECT_TRUE(RecordPolicy::every_cycle().checkpoints.empty());
}

TEST(RepeatedScheme, RecordsEveryCycleAndMatchesReplay) {
  const auto cfg = small_config(RepeatedScheme{0.8});
  RandomStream rng(21);
  const auto record = run_repeated(cfg, 1.0, rng);
  ASSERT_EQ(record.cycles.size(), cfg.n_max);
  for (std::size_t i = 0; i < record.cycles.size(); ++i) {
    EXPECT_EQ(record.cycles[i].cycle, i + 1);
    EXPECT_DOUBLE_EQ(record.cycles[i].tau, 0.8);
  }
  const auto replayed = replay(cfg, record);
  for (std::size_t i = 0; i < replayed.size(); ++i) {
    EXPECT_NEAR(record.posterior.log_weights()[i], replayed.log_weights()[i], 1e-9);
  }
  const auto final_estimate = mle_with_uncertainty(replayed);
  EXPECT_NEAR(record.cycles.back().estimate, final_estimate.point, 1e-9);
  EXPECT_NEAR(record.cycles.back().uncertainty, final_estimate.uncertainty, 1e-9);
}

TEST(RepeatedScheme, CheckpointsDoNotChangeTheOutcomeSequence) {
  const auto cfg = small_config(RepeatedScheme{0.8});
  RandomStream a(4);
  RandomStream b(4);
  const auto full = run_repeated(cfg, 1.0, a);
  const auto sparse = run_repeated(cfg, 1.0, b, RecordPolicy::at({1, 10, 150, 400}));
  ASSERT_EQ(sparse.cycles.size(), 3u);
  for (const auto& c : sparse.cycles) {
    const auto& ref = full.cycles[c.cycle - 1];
    EXPECT_EQ(c.outcome, ref.outcome);
    EXPECT_DOUBLE_EQ(c.estimate, ref.estimate);
  }
}

TEST(AdaptiveScheme, CfiVariantUsesOptimalTauOfPreviousEstimate) {
  const auto cfg = small_config(AdaptiveCfiScheme{});
  RandomStream rng(33);
  const auto record = run_adaptive(cfg, AdaptiveVariant::Cfi, 1.0, rng);
  ASSERT_EQ(record.cycles.size(), cfg.n_max);
  for (std::size_t i = 1; i < record.cycles.size(); ++i) {
    EXPECT_DOUBLE_EQ(record.cycles[i].tau, 0.8 * record.cycles[i - 1].estimate);
  }
  const auto replayed = replay(cfg, record);
  for (std::size_t i = 0; i < replayed.size(); ++i) {
    EXPECT_NEAR(record.posterior.log_weights()[i], replayed.log_weights()[i], 1e-9);
  }
}

TEST(AdaptiveScheme, FreeEvolutionTimesStayOnLattice) {
  const double omega = 40.0;
  for (Scheme scheme : {Scheme{AdaptiveCfiScheme{}}, Scheme{AdaptiveLocallyOptimalScheme{}}}) {
    auto cfg = small_config(scheme, Protocol::free_evolution(omega));
    cfg.n_max = 40;
    RandomStream rng(6);
    const auto record = run_trial(cfg, 1.0, rng);
    for (const auto& c : record.cycles) {
      const double n = c.tau * omega / kPi;
      EXPECT_NEAR(n, std::round(n), 1e-9);
      EXPECT_GE(std::round(n), 1.0);
    }
  }
}

TEST(AdaptiveScheme, RunsAreReproducibleAndConverge) {
  auto cfg = small_config(AdaptiveLocallyOptimalScheme{});
  cfg.n_max = 300;
  RandomStream a(77);
  RandomStream b(77);
  const auto first = run_trial(cfg, 1.0, a);
  const auto second = run_trial(cfg, 1.0, b);
  ASSERT_EQ(first.cycles.size(), second.cycles.size());
  for (std::size_t i = 0; i < first.cycles.size(); ++i) {
    EXPECT_DOUBLE_EQ(first.cycles[i].tau, second.cycles[i].tau);
    EXPECT_EQ(first.cycles[i].outcome, second.cycles[i].outcome);
  }
  EXPECT_NEAR(first.cycles.back().estimate, 1.0, 0.5);
  EXPECT_LT(first.cycles.back().uncertainty, first.cycles.front().uncertainty);
}

TEST(AdaptiveScheme, VariantMustMatchScheme) {
  const auto cfg = small_config(RepeatedScheme{0.8});
  RandomStream rng(1);
  EXPECT_THROW(run_adaptive(cfg, AdaptiveVariant::Cfi, 1.0, rng), ConfigError);
  EXPECT_THROW(run_adaptive(cfg, AdaptiveVariant::LocallyOptimal, 1.0, rng), ConfigError);
  EXPECT_THROW(run_trial(small_config(LsqScheme{}), 1.0, rng), ConfigError);
  EXPECT_THROW(run_repeated(small_config(AdaptiveCfiScheme{}), 1.0, rng), ConfigError);
}

TEST(ExpectedUncertainty, FastPathMatchesDirectEvaluation) {
  RandomStream rng(10);
  for (const auto& protocol : {Protocol::spin_echo(), Protocol::free_evolution(25.0)}) {
    auto post = PosteriorGrid::flat(0.05, 5.0, 600);
    std::vector<double> ll;
    for (int k = 0; k < 25; ++k) {
      const double tau = rng.uniform(0.2, 1.5);
      const int u = sample_outcome(dephasing_outcome_probs(protocol, tau, 1.0), rng);
      dephasing_log_likelihood(post, protocol, tau, u, ll);
      post.update_log(ll);
    }
    const double t_m = mle(post).point;
    const ExpectedUncertainty fast(post, protocol, t_m);
    for (double tau : {0.05, 0.3, 0.8, 1.7, 4.0}) {
      const double direct = brute_force_expected_uncertainty(post, tau, protocol, t_m);
      EXPECT_NEAR(fast(tau), direct, 1e-9 * direct) << "tau=" << tau;
      EXPECT_DOUBLE_EQ(expected_uncertainty(post, tau, protocol, t_m), fast(tau));
    }
    EXPECT_DOUBLE_EQ(expected_uncertainty(post, 0.8, protocol),
                     expected_uncertainty(post, 0.8, protocol, t_m));
    EXPECT_THROW(expected_uncertainty(post, 0.0, protocol), DomainError);
  }
}

TEST(ExpectedUncertainty, VanishingTimeLeavesSpreadUnchanged) {
  auto post = PosteriorGrid::flat(0.05, 5.0, 500);
  std::vector<double> ll;
  for (int u : {1, 1, -1, 1}) {
    dephasing_log_likelihood(post, Protocol::spin_echo(), 1.0, u, ll);
    post.update_log(ll);
  }
  const double t_m = mle(post).point;
  const double current = posterior_uncertainty(post, t_m);
  EXPECT_NEAR(expected_uncertainty(post, 1e-9, Protocol::spin_echo(), t_m), current, 1e-6 * current);
}

TEST(ExpectedUncertainty, NarrowGaussianPriorPrefersCfiOptimum) {
  // For a prior much narrower than T, the expected spread is minimised near
  // the Fisher-optimal time.
  const auto post = PosteriorGrid::gaussian(0.9, 1.1, 2001, 1.0, 0.01);
  std::vector<double> candidates;
  for (int k = 10; k <= 300; ++k) candidates.push_back(0.01 * k);
  const double best = locally_optimal_tau(post, Protocol::spin_echo(), 1.0, candidates);
  EXPECT_NEAR(best, exact_optimal_tau_factor(), 0.011);
  EXPECT_THROW(locally_optimal_tau(post, Protocol::spin_echo(), 1.0, {}), ConfigError);
}

TEST(CandidateTaus, LogSpacedOrSnapped) {
  const AdaptiveLocallyOptimalScheme scheme{5, 0.1, 10.0};
  const auto echo = candidate_taus(Protocol::spin_echo(), 2.0, scheme);
  ASSERT_EQ(echo.size(), 5u);
  const double expected[] = {0.2, 0.2 * std::sqrt(10.0), 2.0, 2.0 * std::sqrt(10.0), 20.0};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(echo[i], expected[i], 1e-12 * expected[i]);

  const auto free = candidate_taus(Protocol::free_evolution(1.0), 1.0, AdaptiveLocallyOptimalScheme{});
  for (std::size_t i = 0; i < free.size(); ++i) {
    const double n = free[i] / kPi;
    EXPECT_NEAR(n, std::round(n), 1e-12);
    if (i > 0) EXPECT_GT(free[i], free[i - 1]);
  }
  EXPECT_DOUBLE_EQ(free.front(), kPi);
}

TEST(CandidateTaus, FullLatticeCoversEveryHalfPeriod) {
  AdaptiveLocallyOptimalScheme scheme;
  scheme.full_lattice = true;
  const double omega = 100.0;
  const auto taus = candidate_taus(Protocol::free_evolution(omega), 1.0, scheme);
  // round(0.05 omega / pi) = 2 through round(5 omega / pi) = 159
  ASSERT_EQ(taus.size(), 158u);
  for (std::size_t i = 0; i < taus.size(); ++i) {
    EXPECT_NEAR(taus[i], static_cast<double>(i + 2) * kPi / omega, 1e-12);
  }
  // Echo ignores the flag.
  EXPECT_EQ(candidate_taus(Protocol::spin_echo(), 1.0, scheme).size(), scheme.candidates);
}

TEST(LeastSquares, FitRecoversNoiselessDecay) {
  for (const auto& protocol : {Protocol::spin_echo(), Protocol::free_evolution(30.0)}) {
    std::vector<DecaySample> samples;
    const double dt = lsq_grid_spacing(protocol, 4.0, 40);
    for (int k = 1; k <= 40; ++k) {
      const double tau = k * dt;
      samples.push_back({tau, signal_contrast(protocol, tau) * std::exp(-tau / 1.7)});
    }
    EXPECT_NEAR(fit_decay(protocol, samples).point, 1.7, 1e-7);
  }
}

TEST(LeastSquares, FitFailsWithoutBracket) {
  const std::vector<DecaySample> flat{{0.1, 1.0}, {0.2, 1.0}, {0.3, 1.0}};
  EXPECT_THROW(fit_decay(Protocol::spin_echo(), flat), FitFailure);
  const std::vector<DecaySample> one{{0.1, 0.5}};
  EXPECT_THROW(fit_decay(Protocol::spin_echo(), one), FitFailure);
  const std::vector<DecaySample> bad{{0.1, 1.5}, {0.2, 0.5}};
  EXPECT_THROW(fit_decay(Protocol::spin_echo(), bad), DomainError);
}

TEST(LeastSquares, GridSpacing) {
  EXPECT_DOUBLE_EQ(lsq_grid_spacing(Protocol::spin_echo(), 10.0, 100), 0.1);
  const double omega = 400.0 * kPi / 3.0;
  const double dt = lsq_grid_spacing(Protocol::free_evolution(omega), 10.0, 100);
  EXPECT_NEAR(dt, 13.0 * 3.0 / 400.0, 1e-15);
}

TEST(LeastSquares, RunProducesSpreadNearTheory) {
  auto cfg = small_config(LsqScheme{5.0, 50, 40, 60});
  RandomStream rng(8);
  const auto result = run_lsq(cfg, 1.0, rng);
  EXPECT_EQ(result.measurements, 2000u);
  EXPECT_EQ(result.fits.size() + result.failures, 60u);
  EXPECT_EQ(result.failure_rate(), 0.0);
  EXPECT_NEAR(result.estimate.point, 1.0, 0.05);
  // Scale of the least-squares spread: 1.8 sqrt(T tau_max / N).
  const double scale = 1.8 * std::sqrt(5.0 / 2000.0);
  EXPECT_GT(result.estimate.uncertainty, 0.6 * scale);
  EXPECT_LT(result.estimate.uncertainty, 1.5 * scale);
  RandomStream rng2(1);
  EXPECT_THROW(run_lsq(small_config(AdaptiveCfiScheme{}), 1.0, rng2), ConfigError);
}

TEST(TrialCsv, WritesOneRowPerRecordedCycle) {
  auto cfg = small_config(RepeatedScheme{0.8});
  cfg.n_max = 3;
  RandomStream rng(2);
  const auto record = run_repeated(cfg, 1.0, rng);
  std::ostringstream out;
  write_trial_csv(out, record);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "cycle,tau,outcome,estimate,uncertainty");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

}  // namespace
}  // namespace noisescope
