#include <benchmark/benchmark.h>

#include <vector>

#include "olrsim/grpo.hpp"
#include "olrsim/olr.hpp"
#include "olrsim/policy.hpp"
#include "olrsim/runner.hpp"

namespace {

using namespace olrsim;

void BM_ActionProbs(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const auto task = generate_dataset({1, 5, 1, 0.5, dim, 1});
  PolicyParams th{Eigen::VectorXd::Constant(dim, 0.01)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(action_probs(th, task.features, task.dataset[0].space));
  }
}
BENCHMARK(BM_ActionProbs)->Arg(32)->Arg(256);

void BM_GradientContributions(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const auto task = generate_dataset({200, 5, 4, 0.5, dim, 2});
  const auto th = PolicyParams::zeros(dim);
  Rng rng(3);
  std::vector<RolloutBatch> batches;
  for (const auto& p : task.dataset) {
    auto ys = sample_rollouts(th, task.features, p.space, 8, rng);
    auto r = rewards_for(ys, p.train_label);
    batches.push_back(make_batch(p.prompt_id, 1, std::move(ys), std::move(r), 1e-6));
  }
  const UpdateConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        gradient_contributions(th, th, th, task.features, task.dataset, batches, cfg));
  }
}
BENCHMARK(BM_GradientContributions)->Arg(32)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_Slope(benchmark::State& state) {
  MajorityTrajectory t;
  for (int e = 1; e <= state.range(0); ++e) t.append({e, 0, 0.2 + 0.001 * e});
  for (auto _ : state) benchmark::DoNotOptimize(slope(t));
}
BENCHMARK(BM_Slope)->Arg(20)->Arg(200);

void BM_RunExperiment(benchmark::State& state) {
  RunConfig c;
  c.dim = static_cast<int>(state.range(0));
  c.epochs = 10;
  c.eta = 40.0;
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(c));
}
BENCHMARK(BM_RunExperiment)->Arg(32)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
