// Copyright 2026 The fairimp Authors.
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

#include <cstddef>
#include <cstdint>
#include <vector>

#include "benchmark/benchmark.h"
#include "fairimp/dataset.hpp"
#include "fairimp/importance.hpp"
#include "fairimp/learners.hpp"

namespace fairimp {
namespace {

Dataset Synthetic(std::size_t rows, std::size_t cols) {
  SyntheticParams p;
  p.n_samples = rows;
  p.n_features = cols;
  p.seed = 1;
  return GenerateSynthetic(p).dataset;
}

void BM_DecisionTreeFit(benchmark::State& state) {
  const Dataset ds = Synthetic(static_cast<std::size_t>(state.range(0)), 10);
  const ModelSpec spec = ModelSpec::DecisionTree(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Fit(spec, ds.features, ds.target));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DecisionTreeFit)->Arg(1000)->Arg(10000);

void BM_RandomForestFit(benchmark::State& state) {
  const Dataset ds = Synthetic(static_cast<std::size_t>(state.range(0)), 10);
  const ModelSpec spec = ModelSpec::RandomForest(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Fit(spec, ds.features, ds.target));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RandomForestFit)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_RandomForestPredict(benchmark::State& state) {
  const Dataset ds = Synthetic(static_cast<std::size_t>(state.range(0)), 10);
  const TrainedModel model = Fit(ModelSpec::RandomForest(1), ds.features, ds.target);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.predict(ds.features));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RandomForestPredict)->Arg(1000)->Arg(10000);

void BM_MinipatchEnsemble(benchmark::State& state) {
  const Dataset ds = Synthetic(1000, 10);
  auto config = MinipatchConfig::FromFractions(ds.rows(), ds.cols(), 0.2, 0.2,
                                               static_cast<std::size_t>(state.range(0)));
  config.seed = 1;
  const ModelSpec spec = ModelSpec::RandomForest(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(FitMinipatchEnsemble(ds, spec, config));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MinipatchEnsemble)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_MinipatchScores(benchmark::State& state) {
  const Dataset ds = Synthetic(1000, 10);
  auto config = MinipatchConfig::FromFractions(ds.rows(), ds.cols(), 0.2, 0.2, 500);
  config.seed = 1;
  const MinipatchEnsemble ens =
      FitMinipatchEnsemble(ds, ModelSpec::DecisionTree(1), config);
  for (auto _ : state) {
    benchmark::DoNotOptimize(MpOcclusionScores(ens));
  }
}
BENCHMARK(BM_MinipatchScores);

}  // namespace
}  // namespace fairimp

BENCHMARK_MAIN();
