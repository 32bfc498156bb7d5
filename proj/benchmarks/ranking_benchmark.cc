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

#include "support/synthetic.h"
#include "tcrank/btrank.h"
#include "tcrank/corpus.h"
#include "tcrank/pairing.h"
#include "tcrank/random.h"

namespace tcrank {
namespace {

struct Instance {
  std::vector<StatementId> ids;
  std::vector<WinTuple> tuples;
};

Instance Planted(std::size_t n) {
  const auto doc = SegmentPolicy(PolicyId("p"), "", testing::SyntheticPolicyText(n));
  Instance inst;
  inst.ids = testing::StatementIds(doc);
  Rng rng(1);
  const auto comparisons = testing::SimulateComparisons(
      PolicyId("p"), EnumeratePairs(doc), testing::PlantedAbilities(inst.ids, 3.0, 1), rng);
  inst.tuples = ExtractWinTuples(comparisons);
  return inst;
}

void BM_FitBradleyTerry(benchmark::State& state) {
  const Instance inst = Planted(static_cast<std::size_t>(state.range(0)));
  FitOptions options;
  options.newton_after = static_cast<int>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(FitBradleyTerry(PolicyId("p"), inst.tuples, inst.ids, options));
  }
  state.counters["tuples"] = static_cast<double>(inst.tuples.size());
}
BENCHMARK(BM_FitBradleyTerry)
    ->ArgNames({"n", "newton_after"})
    ->Args({20, 200})
    ->Args({44, 200})
    ->Args({44, 0})
    ->Args({100, 200})
    ->Unit(benchmark::kMillisecond);

void BM_AggregateScores(benchmark::State& state) {
  const PairKey pair = PairKey::Of(StatementId("a"), StatementId("b"));
  std::vector<std::array<int, kVotesPerPair>> all;
  for (int code = 0; code < 729; ++code) {
    std::array<int, kVotesPerPair> s{};
    int c = code;
    for (int& v : s) {
      v = c % 3 - 1;
      c /= 3;
    }
    all.push_back(s);
  }
  for (auto _ : state) {
    for (const auto& s : all) benchmark::DoNotOptimize(AggregateScores(PolicyId("p"), pair, s));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 729);
}
BENCHMARK(BM_AggregateScores);

}  // namespace
}  // namespace tcrank

BENCHMARK_MAIN();
