// Serial reference kernels against their OpenMP counterparts. The first
// benchmark argument selects the policy: 0 serial, 1 parallel.

#include <benchmark/benchmark.h>

#include "spurious/analysis.hpp"
#include "spurious/estimators.hpp"
#include "spurious/ovb.hpp"
#include "spurious/scenarios.hpp"

using namespace spurious;

namespace {

Execution policy(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

void policy_args(benchmark::internal::Benchmark* b) {
  b->ArgNames({"parallel"})->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
}

void example1(benchmark::State& state) {
  const Example1Spec spec{20, 0.9, 20000, 0};
  for (auto _ : state) benchmark::DoNotOptimize(example1_simulate(spec, policy(state)));
}

void bounded_sample(benchmark::State& state) {
  const Index d = 8;
  const MatrixXd a = MatrixXd::Random(d, d);
  const auto dist = TestDistribution::make(a * a.transpose() / d, "g");
  const RobustSpec spec{1.5, NormKind::l2};
  for (auto _ : state) benchmark::DoNotOptimize(draw_bounded_sample(dist, spec, 20000, 1, policy(state)));
}

void robust(benchmark::State& state) {
  const Index d = 8;
  const MatrixXd z = MatrixXd::Random(4, d);
  const GroundTruth truth{VectorXd::Random(d), {VectorXd::Random(d)}};
  const auto model = fit_full(LabeledData::from_truth(DesignMatrix(z), truth));
  const auto dist = TestDistribution::make(MatrixXd::Identity(d, d) / d, "g");
  const RobustSpec spec{1.0, NormKind::l2};
  for (auto _ : state)
    benchmark::DoNotOptimize(robust_error(model, truth, dist, spec, 20000, 2, policy(state)));
}

void group_losses(benchmark::State& state) {
  const OvbSimpleSpec spec;
  const auto cf = ovb_simple_closed_form(spec);
  const auto gen = ovb_simple_generator(spec);
  const auto pred = ovb_simple_predicate(spec);
  for (auto _ : state)
    benchmark::DoNotOptimize(estimate_group_losses(cf.population, gen, pred, 100000, 3, policy(state)));
}

}  // namespace

BENCHMARK(example1)->Apply(policy_args);
BENCHMARK(bounded_sample)->Apply(policy_args);
BENCHMARK(robust)->Apply(policy_args);
BENCHMARK(group_losses)->Apply(policy_args);

BENCHMARK_MAIN();
