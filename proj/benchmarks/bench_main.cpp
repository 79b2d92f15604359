#include <random>

#include <benchmark/benchmark.h>

#include "edgeplace/fixtures.hpp"
#include "edgeplace/misp.hpp"
#include "edgeplace/rlsp_agent.hpp"
#include "edgeplace/wssp.hpp"

using namespace edgeplace;

namespace {

struct Drone {
  DroneScenario d = bundled_drone_scenario();
  Scenario sc{drone_topology(), d.app};
};

const Drone& drone() {
  static const Drone s;
  return s;
}

void BM_Wssp(benchmark::State& state) {
  const Drone& s = drone();
  const Workload& w = s.d.workloads[static_cast<std::size_t>(state.range(0))];
  for (auto _ : state) benchmark::DoNotOptimize(wssp_place(s.sc, w));
}
BENCHMARK(BM_Wssp)->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);

void BM_Misp(benchmark::State& state) {
  const Drone& s = drone();
  const Workload& w = s.d.workloads[static_cast<std::size_t>(state.range(0))];
  for (auto _ : state) benchmark::DoNotOptimize(misp_place(s.sc, w));
}
BENCHMARK(BM_Misp)->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);

void BM_Coverage(benchmark::State& state) {
  const Drone& s = drone();
  Placement p = misp_place(s.sc, s.d.workloads[2]);
  for (auto _ : state) benchmark::DoNotOptimize(coverage(s.sc, p, s.d.workloads[2]));
}
BENCHMARK(BM_Coverage)->Unit(benchmark::kMicrosecond);

void BM_EnvStep(benchmark::State& state) {
  const Drone& s = drone();
  PlacementEnv env(s.sc, s.d.workloads[2]);
  std::mt19937_64 rng(1);
  for (auto _ : state) {
    if (env.done()) env.reset(rng());
    benchmark::DoNotOptimize(
        env.step({static_cast<ActionType>(rng() % 3), rng() % s.sc.micro_count(), rng() % s.sc.site_count()}));
  }
}
BENCHMARK(BM_EnvStep)->Unit(benchmark::kMicrosecond);

void BM_PolicyForward(benchmark::State& state) {
  const Drone& s = drone();
  PolicyParameters p = init_policy(s.sc, 64, 1);
  PlacementEnv env(s.sc, s.d.workloads[0]);
  Observation obs = env.reset(0);
  for (auto _ : state) benchmark::DoNotOptimize(policy_forward(p, obs));
}
BENCHMARK(BM_PolicyForward)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
