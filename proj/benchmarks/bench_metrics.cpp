#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "augur/metrics.hpp"

namespace {

augur::ScoredSet random_set(std::size_t n) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<augur::ScoredPair> pairs;
  pairs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = unit(rng);
    pairs.push_back({"q" + std::to_string(i), f, unit(rng) < f ? 1 : 0});
  }
  return augur::ScoredSet("bench", std::move(pairs));
}

void BM_Brier(benchmark::State& state) {
  const auto set = random_set(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(augur::brier(set));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Brier)->Arg(1000)->Arg(100000);

void BM_CalibrationIndex(benchmark::State& state) {
  const auto set = random_set(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(augur::calibration_index(set, 10).index);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CalibrationIndex)->Arg(1000)->Arg(100000);

void BM_DropRule(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(7);
  std::map<std::string, augur::MethodForecasts> methods;
  std::map<std::string, int> outcomes;
  for (const char* label : {"a", "b", "c"}) {
    auto& table = methods[label];
    for (std::size_t i = 0; i < n; ++i) {
      const std::string id = "q" + std::to_string(i);
      if (rng() % 20 == 0) {
        table.insert_or_assign(id, augur::MemberResult(augur::Declined{}));
      } else {
        table.insert_or_assign(id, augur::MemberResult(augur::Forecast(0.3)));
      }
      outcomes[id] = static_cast<int>(i % 2);
    }
  }
  for (auto _ : state) benchmark::DoNotOptimize(augur::apply_drop_rule(methods, outcomes).dropped.size());
}
BENCHMARK(BM_DropRule)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
