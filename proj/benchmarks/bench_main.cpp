#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "noisescope/sensing_schemes.hpp"
#include "noisescope/sim_harness.hpp"

namespace noisescope {
namespace {

PosteriorGrid informed_posterior(std::size_t grid, int cycles) {
  auto post = PosteriorGrid::flat(0.05, 10.0, grid);
  RandomStream rng(1);
  std::vector<double> ll;
  const auto echo = Protocol::spin_echo();
  for (int k = 0; k < cycles; ++k) {
    const int u = sample_outcome(dephasing_outcome_probs(echo, 0.8, 1.0), rng);
    dephasing_log_likelihood(post, echo, 0.8, u, ll);
    post.update_log(ll);
  }
  return post;
}

void BM_PosteriorUpdate(benchmark::State& state) {
  auto post = PosteriorGrid::flat(0.05, 10.0, static_cast<std::size_t>(state.range(0)));
  std::vector<double> ll;
  int u = 1;
  for (auto _ : state) {
    dephasing_log_likelihood(post, Protocol::spin_echo(), 0.8, u, ll);
    post.update_log(ll);
    u = -u;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PosteriorUpdate)->Arg(500)->Arg(2000)->Arg(8000);

void BM_ExpectedUncertainty(benchmark::State& state) {
  const auto post = informed_posterior(2000, static_cast<int>(state.range(0)));
  const double t_m = mle(post).point;
  for (auto _ : state) {
    const ExpectedUncertainty score(post, Protocol::spin_echo(), t_m);
    benchmark::DoNotOptimize(score(0.8 * t_m));
  }
}
BENCHMARK(BM_ExpectedUncertainty)->Arg(10)->Arg(100)->Arg(1000);

void BM_LocallyOptimalTau(benchmark::State& state) {
  const auto post = informed_posterior(2000, 100);
  const double t_m = mle(post).point;
  const auto candidates = candidate_taus(Protocol::spin_echo(), t_m, AdaptiveLocallyOptimalScheme{});
  for (auto _ : state) {
    benchmark::DoNotOptimize(locally_optimal_tau(post, Protocol::spin_echo(), t_m, candidates));
  }
}
BENCHMARK(BM_LocallyOptimalTau);

void BM_AdaptiveTrial(benchmark::State& state) {
  SchemeConfig cfg;
  cfg.scheme = AdaptiveCfiScheme{};
  cfg.n_max = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    RandomStream rng(seed++);
    benchmark::DoNotOptimize(run_trial(cfg, 1.0, rng, RecordPolicy::at({cfg.n_max})));
  }
}
BENCHMARK(BM_AdaptiveTrial)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_FisherSweep(benchmark::State& state) {
  FisherSweepSpec spec;
  spec.protocol = Protocol::free_evolution(kDefaultOmega);
  spec.resolution = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sweep_fisher(spec));
}
BENCHMARK(BM_FisherSweep)->Arg(500)->Arg(4000);

void BM_LeastSquaresFit(benchmark::State& state) {
  std::vector<DecaySample> samples;
  RandomStream rng(3);
  for (int k = 1; k <= 100; ++k) {
    const double tau = 0.1 * k;
    samples.push_back({tau, std::exp(-tau) + rng.uniform(-0.05, 0.05)});
  }
  for (auto _ : state) benchmark::DoNotOptimize(fit_decay(Protocol::spin_echo(), samples));
}
BENCHMARK(BM_LeastSquaresFit);

}  // namespace
}  // namespace noisescope

BENCHMARK_MAIN();
