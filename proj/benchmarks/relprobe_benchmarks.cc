#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "relprobe/classifiers.h"
#include "relprobe/dcor.h"
#include "relprobe/evaluation.h"
#include "relprobe/random.h"
#include "synthetic.h"

namespace relprobe {
namespace {

std::vector<double> Sample(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.Normal();
  return v;
}

void BM_DistanceCorrelation(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = Sample(n, 1), y = Sample(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(DistanceCorrelation(x, y));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DistanceCorrelation)->RangeMultiplier(4)->Range(16, 16384)->Complexity();

void BM_PlanPermuted(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = Sample(n, 1), y = Sample(n, 2);
  const DistanceCorrelationPlan plan(x, y);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(3);
  for (auto _ : state) {
    rng.Shuffle(std::span<std::size_t>(perm));
    benchmark::DoNotOptimize(plan.Dcor(perm));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PlanPermuted)->RangeMultiplier(4)->Range(16, 16384)->Complexity();

void BM_PermutationPValue(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = Sample(n, 1), y = Sample(n, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(PermutationPValue(x, y, kDefaultPermutations, 7));
  }
}
BENCHMARK(BM_PermutationPValue)->Arg(50)->Arg(250)->Unit(benchmark::kMillisecond);

void BM_Loo(benchmark::State& state) {
  const auto data = synthetic::Clusters(3, 10, 50, 5.0, 77);
  ClassifierSpec spec;
  spec.kind = static_cast<ClassifierKind>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(LooAssociation(spec, data, 100));
  state.SetLabel(std::string(ClassifierName(spec.kind)));
}
BENCHMARK(BM_Loo)
    ->Arg(static_cast<int>(ClassifierKind::kKnn))
    ->Arg(static_cast<int>(ClassifierKind::kLinearSvm))
    ->Arg(static_cast<int>(ClassifierKind::kFfn))
    ->Unit(benchmark::kMillisecond)
    ->Iterations(1);

}  // namespace
}  // namespace relprobe

BENCHMARK_MAIN();
