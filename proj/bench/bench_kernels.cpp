// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "ami/freqdom.hpp"
#include "ami/scenario.hpp"

using namespace ami;

namespace {

void BM_RobustnessSweepSerial(benchmark::State& state) {
  const RateLoopModel model;
  for (auto _ : state) {
    benchmark::DoNotOptimize(robustness_sweep_serial(model, UncertaintyBox{}, static_cast<int>(state.range(0))));
  }
}

void BM_RobustnessSweepParallel(benchmark::State& state) {
  const RateLoopModel model;
  for (auto _ : state) {
    benchmark::DoNotOptimize(robustness_sweep(model, UncertaintyBox{}, static_cast<int>(state.range(0))));
  }
}

void BM_WorkspaceSweepSerial(benchmark::State& state) {
  const auto vehicle = VehicleConfig{}.params();
  for (auto _ : state) {
    benchmark::DoNotOptimize(workspace_kk_sweep_serial(DeltaGeometry{}, WorkspacePayload{}, vehicle,
                                                       static_cast<int>(state.range(0))));
  }
}

void BM_WorkspaceSweepParallel(benchmark::State& state) {
  const auto vehicle = VehicleConfig{}.params();
  for (auto _ : state) {
    benchmark::DoNotOptimize(workspace_kk_sweep(DeltaGeometry{}, WorkspacePayload{}, vehicle,
                                                static_cast<int>(state.range(0))));
  }
}

std::vector<ScenarioConfig> hover_batch() {
  const char* yaml = R"(
name: bench
mode: iags
duration: 2.0
environment: {accel_noise: 0.02, gyro_noise: 0.002}
trajectory:
  body:
    - [0.0, 0.0, 0.0, 1.0, 0.0]
    - [2.0, 1.0, 0.0, 1.0, 0.0]
)";
  std::vector<ScenarioConfig> cfgs;
  for (std::uint64_t s = 1; s <= 8; ++s) {
    auto c = parse_config(yaml);
    c.seed = s;
    cfgs.push_back(c);
  }
  return cfgs;
}

void BM_ScenarioBatchSerial(benchmark::State& state) {
  const auto cfgs = hover_batch();
  for (auto _ : state) {
    for (const auto& c : cfgs) benchmark::DoNotOptimize(run_scenario(c));
  }
}

void BM_ScenarioBatchParallel(benchmark::State& state) {
  const auto cfgs = hover_batch();
  for (auto _ : state) benchmark::DoNotOptimize(run_batch(cfgs));
}

}  // namespace

BENCHMARK(BM_RobustnessSweepSerial)->Arg(9)->Arg(21)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RobustnessSweepParallel)->Arg(9)->Arg(21)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_WorkspaceSweepSerial)->Arg(25)->Arg(41)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WorkspaceSweepParallel)->Arg(25)->Arg(41)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ScenarioBatchSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScenarioBatchParallel)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
