#include <benchmark/benchmark.h>

#include "samp/channels.hpp"
#include "samp/ensembles.hpp"
#include "samp/free_probability.hpp"
#include "samp/rng.hpp"
#include "samp/solvers.hpp"

using namespace samp;

namespace {

ProblemInstance problem(EnsembleKind kind, Eigen::Index n, Eigen::Index k, ChannelModel prior) {
  EnsembleSpec s;
  s.kind = kind;
  s.rows = n;
  s.cols = k;
  return synthesize_problem(s, prior, AwgnLikelihood{0.01}, 1);
}

void sweep(benchmark::State& state, StrategyKind kind, EnsembleKind ensemble) {
  const auto k = static_cast<Eigen::Index>(state.range(0));
  const auto p = problem(ensemble, k / 2, k, LaplacePrior{1.0});
  SolverConfig c;
  c.strategy.kind = kind;
  if (kind == StrategyKind::SampRTransform && ensemble == EnsembleKind::RowOrthogonal) {
    c.strategy.r_jz.kind = RSourceKind::ScaledSpectrum;
    c.strategy.r_jx.kind = RSourceKind::FreeCompression;
  }
  Solver solver(p, c);
  EpState s = solver.initial_state();
  for (int i = 0; i < 5; ++i) solver.sweep(s);
  for (auto _ : state) {
    EpState t = s;
    solver.sweep(t);
    benchmark::DoNotOptimize(t.x_hat.data());
  }
  state.SetComplexityN(k);
}

void BM_SweepGampFull(benchmark::State& s) { sweep(s, StrategyKind::GampFull, EnsembleKind::IidGaussian); }
void BM_SweepGampIid(benchmark::State& s) { sweep(s, StrategyKind::GampIid, EnsembleKind::IidGaussian); }
void BM_SweepExactEp(benchmark::State& s) { sweep(s, StrategyKind::ExactEp, EnsembleKind::IidGaussian); }
void BM_SweepSampRowOrthogonal(benchmark::State& s) {
  sweep(s, StrategyKind::SampRTransform, EnsembleKind::RowOrthogonal);
}

BENCHMARK(BM_SweepGampFull)->RangeMultiplier(2)->Range(256, 2048)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SweepGampIid)->RangeMultiplier(2)->Range(256, 2048)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SweepExactEp)->RangeMultiplier(2)->Range(256, 1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepSampRowOrthogonal)->RangeMultiplier(2)->Range(256, 2048)->Unit(benchmark::kMicrosecond);

void BM_RTransform(benchmark::State& state) {
  Rng rng(2);
  Eigen::VectorXd ev(state.range(0));
  for (auto& v : ev) v = 0.01 + rng.uniform();
  const EmpiricalSpectrum sp(ev);
  double w = -0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(r_transform_real(sp, w));
    w = w < -5.0 ? -0.5 : w * 1.01;
  }
}
BENCHMARK(BM_RTransform)->Range(64, 4096);

template <class Model>
void BM_PriorMoments(benchmark::State& state) {
  const ChannelModel m = Model{};
  double kappa = -3.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(prior_tilted_moments(m, kappa, 4.0));
    kappa = kappa > 3.0 ? -3.0 : kappa + 0.01;
  }
}
BENCHMARK(BM_PriorMoments<GaussianPrior>);
BENCHMARK(BM_PriorMoments<BernoulliGaussianPrior>);
BENCHMARK(BM_PriorMoments<LaplacePrior>);

void BM_ProbitMoments(benchmark::State& state) {
  const ChannelModel m = ProbitLikelihood{0.1};
  double kappa = -3.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(likelihood_tilted_moments(m, 1.0, kappa, 4.0));
    kappa = kappa > 3.0 ? -3.0 : kappa + 0.01;
  }
}
BENCHMARK(BM_ProbitMoments);

}  // namespace
BENCHMARK_MAIN();
