// Copyright 2026 The layered_nav Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Serial reference vs OpenMP kernels: library planning and batch episodes.

#include <benchmark/benchmark.h>

#include "lnav/config.hpp"
#include "lnav/sim.hpp"

using namespace lnav;

namespace {

const Config& clutter() {
  static const Config c = load_config(std::string(LNAV_CONFIG_DIR) + "/clutter_human.json");
  return c;
}

void BM_BuildLibrary(benchmark::State& st) {
  const auto exec = static_cast<Execution>(st.range(0));
  TrajoptConfig cfg;
  cfg.horizon = static_cast<int>(st.range(1));
  cfg.ts = 8.0 / static_cast<double>(cfg.horizon);
  for (auto _ : st) {
    benchmark::DoNotOptimize(build_library({0, 0, 0}, {4, 0, 0}, cfg, nullptr, exec));
  }
}
BENCHMARK(BM_BuildLibrary)
    ->ArgNames({"parallel", "T"})
    ->ArgsProduct({{0, 1}, {16, 40}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

void BM_RunBenchmark(benchmark::State& st) {
  const auto exec = static_cast<Execution>(st.range(0));
  const Config& c = clutter();
  static const PathLibrary lib = build_library(c.scenario.start, c.scenario.goal, c.trajopt);
  for (auto _ : st) {
    benchmark::DoNotOptimize(run_benchmark(c.scenario, {ControllerKind::kMcbf, ControllerKind::kCbf},
                                           static_cast<int>(st.range(1)), 7, lib, c.navigator, exec));
  }
}
BENCHMARK(BM_RunBenchmark)
    ->ArgNames({"parallel", "trials"})
    ->ArgsProduct({{0, 1}, {4, 16}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
