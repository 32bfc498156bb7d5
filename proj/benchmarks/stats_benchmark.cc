// Copyright 2026 The tcrank Authors.
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

#include <benchmark/benchmark.h>

#include <vector>

#include "tcrank/random.h"
#include "tcrank/sampling.h"
#include "tcrank/svm.h"

namespace tcrank {
namespace {

void BM_KendallTau(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = static_cast<double>(rng.UniformIndex(n / 4 + 1));
    y[i] = rng.Uniform();
  }
  for (auto _ : state) benchmark::DoNotOptimize(KendallTau(x, y));
  state.SetComplexityN(static_cast<std::int64_t>(n));
}
BENCHMARK(BM_KendallTau)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

void BM_SolveSmo(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = i % 2 ? 1 : -1;
    std::vector<double> row(20);
    for (double& v : row) v = rng.Normal(0.5 * label, 1.0);
    x.push_back(std::move(row));
    y.push_back(label);
  }
  const SquareMatrix gram = GramMatrix(KernelType::kRbf, 0.05, x);
  for (auto _ : state) benchmark::DoNotOptimize(SolveSmo(gram, y, 10.0));
}
BENCHMARK(BM_SolveSmo)->Arg(100)->Arg(300)->Arg(600)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace tcrank

BENCHMARK_MAIN();
