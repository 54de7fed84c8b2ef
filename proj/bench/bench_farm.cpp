#include <benchmark/benchmark.h>

#include "slowstart/farm.hpp"
#include "slowstart/model.hpp"
#include "slowstart/walks.hpp"

namespace {

using namespace slowstart;

// One velocity replica: palm car tracked up to time t.
double velocity_replica(std::size_t r, double t) {
  ModelParams p;
  p.lambda = 2.0;
  p.palm = true;
  p.seed = replica_seed(1, static_cast<std::int64_t>(r));
  const auto config = generate_initial(p, {-t, 0.0});
  DepartureClocks clocks(p.seed);
  const auto walks = build_walks(config, clocks, t);
  return -car_state(walks, 0, t).position / t;
}

constexpr std::size_t kReplicas = 64;
constexpr double kHorizon = 2000.0;

void BM_FarmSerial(benchmark::State& state) {
  for (auto _ : state) {
    auto out = run_replicas_serial<double>(
        kReplicas, [](std::size_t r) { return velocity_replica(r, kHorizon); });
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * kReplicas));
}
BENCHMARK(BM_FarmSerial)->Unit(benchmark::kMillisecond);

void BM_FarmParallel(benchmark::State& state) {
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto out = run_replicas<double>(kReplicas, threads,
                                    [](std::size_t r) { return velocity_replica(r, kHorizon); });
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * kReplicas));
}
BENCHMARK(BM_FarmParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

InitialConfig cars(std::int64_t n) {
  ModelParams p;
  p.lambda = 1.0;
  p.seed = 3;
  return generate_initial(p, {0.0, static_cast<double>(n)});
}

void BM_Schedule(benchmark::State& state) {
  const auto config = cars(state.range(0));
  for (auto _ : state) {
    DepartureClocks clocks(3);
    auto table = build_schedule(config, clocks);
    benchmark::DoNotOptimize(table);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Schedule)->RangeMultiplier(2)->Range(250, 4000)->Complexity(benchmark::oNSquared);

void BM_Walks(benchmark::State& state) {
  const auto config = cars(state.range(0));
  for (auto _ : state) {
    DepartureClocks clocks(3);
    auto walks = build_walks(config, clocks);
    benchmark::DoNotOptimize(walks);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Walks)->RangeMultiplier(2)->Range(250, 64000)->Complexity(benchmark::oNLogN);

}  // namespace

BENCHMARK_MAIN();
