// Copyright 2026 The vexsense Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <benchmark/benchmark.h>

#include "vexsense/bench.hpp"
#include "vexsense/features.hpp"
#include "vexsense/svm.hpp"

namespace {

using namespace vexsense;

const SimulatorConfig kSim;

void BM_SimulateWindow(benchmark::State& state) {
  const double seconds = static_cast<double>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto trace = kSim.simulate(kSim.scenario(ContactState::open_vessel, 70.0, 1.5, 0.01, ++seed), seconds);
    benchmark::DoNotOptimize(trace);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(seconds * 1000.0));
}
BENCHMARK(BM_SimulateWindow)->Arg(2)->Arg(3);

void BM_ComputeFeatures(benchmark::State& state) {
  const auto ref = kSim.simulate(kSim.scenario(ContactState::open_vessel, 70.0, 1.5, 0.15, 1), 3.0);
  const auto cur = kSim.simulate(kSim.scenario(ContactState::clot_contact, 70.0, 1.5, 0.0, 2), 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(compute_features(cur, ref, ref));
}
BENCHMARK(BM_ComputeFeatures);

void BM_TrainCorpus(benchmark::State& state) {
  const auto corpus = build_training_corpus(1, kSim);
  for (auto _ : state) benchmark::DoNotOptimize(train(corpus));
}
BENCHMARK(BM_TrainCorpus)->Unit(benchmark::kMillisecond);

void BM_Predict(benchmark::State& state) {
  const auto model = train(build_training_corpus(1, kSim));
  FeatureVector x{-3000.0, -2500.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict(model, x));
    x.relative_average_pressure_pa += 1e-3;
  }
}
BENCHMARK(BM_Predict);

void BM_Benchtop(benchmark::State& state) {
  const auto model = train(build_training_corpus(1, kSim));
  const auto threads = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_benchtop(BenchProtocol{}, model, kSim, {}, threads));
}
BENCHMARK(BM_Benchtop)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
