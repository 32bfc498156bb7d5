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

#include "tcrank/sampling.h"

#include <algorithm>
#include <exception>
#include <mutex>
#include <atomic>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <thread>

#include "json.hpp"
#include "tcrank/coverage.h"
#include "tcrank/csv.h"
#include "tcrank/error.h"
#include "tcrank/random.h"
#include "tcrank/stats.h"

namespace tcrank {
namespace {

constexpr int kFractionSteps = 10;

struct TieSums {
  double pairs = 0;   // sum t(t-1)/2
  double v0 = 0;      // sum t(t-1)(2t+5)
  double v1 = 0;      // sum t(t-1)(t-2)
  double v2 = 0;      // sum t(t-1)
};

void AddTieGroup(TieSums& sums, double t) {
  sums.pairs += t * (t - 1) / 2;
  sums.v0 += t * (t - 1) * (2 * t + 5);
  sums.v1 += t * (t - 1) * (t - 2);
  sums.v2 += t * (t - 1);
}

// Counts strict inversions while sorting `values` ascending.
std::uint64_t MergeSortInversions(std::vector<double>& values,
                                  std::vector<double>& scratch,
                                  std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t swaps = MergeSortInversions(values, scratch, lo, mid) +
                        MergeSortInversions(values, scratch, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (values[j] < values[i]) {
      swaps += mid - i;
      scratch[k++] = values[j++];
    } else {
      scratch[k++] = values[i++];
    }
  }
  while (i < mid) scratch[k++] = values[i++];
  while (j < hi) scratch[k++] = values[j++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo),
            scratch.begin() + static_cast<std::ptrdiff_t>(hi),
            values.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

std::vector<double> RankVector(const Ranking& ranking,
                               std::span<const StatementId> ids) {
  std::vector<double> out;
  out.reserve(ids.size());
  for (const StatementId& id : ids) {
    out.push_back(static_cast<double>(ranking.Rank(id)));
  }
  return out;
}

std::set<StatementId> TopSet(const Ranking& ranking) {
  const std::size_t k = TopSetSize(ranking.size());
  return {ranking.ordered.begin(),
          ranking.ordered.begin() + static_cast<std::ptrdiff_t>(k)};
}

}  // namespace

KendallResult KendallTau(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kInvalidInput, "Kendall tau inputs differ in length");
  }
  const std::size_t n = x.size();
  if (n < 2) {
    throw Error(ErrorCode::kInvalidInput, "Kendall tau needs at least 2 items");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return y[a] < y[b];
  });

  TieSums x_ties, y_ties;
  double joint_ties = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && x[order[j]] == x[order[i]]) ++j;
    AddTieGroup(x_ties, static_cast<double>(j - i));
    for (std::size_t k = i; k < j;) {
      std::size_t m = k + 1;
      while (m < j && y[order[m]] == y[order[k]]) ++m;
      const double t = static_cast<double>(m - k);
      joint_ties += t * (t - 1) / 2;
      k = m;
    }
    i = j;
  }

  std::vector<double> ys(n), scratch(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  const double discordant =
      static_cast<double>(MergeSortInversions(ys, scratch, 0, n));
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && ys[j] == ys[i]) ++j;
    AddTieGroup(y_ties, static_cast<double>(j - i));
    i = j;
  }

  const double nd = static_cast<double>(n);
  const double total = nd * (nd - 1) / 2;
  const double s =
      total - x_ties.pairs - y_ties.pairs + joint_ties - 2 * discordant;
  KendallResult result;
  result.n = n;
  const double denom = (total - x_ties.pairs) * (total - y_ties.pairs);
  if (denom <= 0) return result;
  result.tau = std::clamp(s / std::sqrt(denom), -1.0, 1.0);

  double var = (nd * (nd - 1) * (2 * nd + 5) - x_ties.v0 - y_ties.v0) / 18;
  if (n > 2) var += x_ties.v1 * y_ties.v1 / (9 * nd * (nd - 1) * (nd - 2));
  var += x_ties.v2 * y_ties.v2 / (2 * nd * (nd - 1));
  result.p_value = var > 0 ? TwoSidedNormalP(s / std::sqrt(var)) : 1.0;
  return result;
}

std::string_view AssociationStrength(double tau) {
  const double a = std::abs(tau);
  if (a > 0.35) return "strong";
  if (a > 0.2) return "medium";
  return "weak";
}

std::size_t TopSetSize(std::size_t n) { return (n * 2 + 9) / 10; }

double SimilarityCoefficient(const Ranking& sample, const Ranking& full) {
  if (sample.size() != full.size() ||
      std::set<StatementId>(sample.ordered.begin(), sample.ordered.end()) !=
          std::set<StatementId>(full.ordered.begin(), full.ordered.end())) {
    throw Error(ErrorCode::kInvalidInput,
                "rankings cover different statement sets");
  }
  if (full.size() == 0) {
    throw Error(ErrorCode::kInvalidInput, "empty rankings");
  }
  const auto top_sample = TopSet(sample);
  const auto top_full = TopSet(full);
  std::size_t common = 0;
  for (const StatementId& id : top_full) common += top_sample.contains(id);
  return static_cast<double>(common) / static_cast<double>(top_full.size());
}

std::vector<AggregatedComparison> SampleComparisons(
    std::span<const AggregatedComparison> comparisons, double fraction,
    std::uint64_t seed) {
  if (comparisons.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no comparisons to sample");
  }
  const std::size_t count = RoundHalfUp(fraction, comparisons.size());
  std::map<StatementId, std::size_t> vertex;
  for (const auto& c : comparisons) {
    vertex.emplace(c.pair.a, 0);
    vertex.emplace(c.pair.b, 0);
  }
  std::size_t next = 0;
  for (auto& [id, index] : vertex) index = next++;
  std::vector<Edge> edges;
  edges.reserve(comparisons.size());
  for (const auto& c : comparisons) {
    edges.emplace_back(vertex[c.pair.a], vertex[c.pair.b]);
  }
  std::vector<AggregatedComparison> out;
  out.reserve(count);
  for (std::size_t i : SampleCoveringEdges(vertex.size(), edges, count, seed)) {
    out.push_back(comparisons[i]);
  }
  return out;
}

ScalabilityResult RunScalabilityExperiment(
    const PolicyId& policy, std::span<const AggregatedComparison> comparisons,
    std::span<const StatementId> statements,
    const ScalabilityOptions& options) {
  if (options.simulations < 1) {
    throw Error(ErrorCode::kInvalidInput, "simulations must be positive");
  }
  std::vector<AggregatedComparison> decided;
  for (const auto& c : comparisons) {
    if (c.outcome != Outcome::kDropped) decided.push_back(c);
  }
  std::vector<StatementId> ids(statements.begin(), statements.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  const std::vector<WinTuple> all_tuples = ExtractWinTuples(decided);
  const Ranking full =
      RankFromModel(FitBradleyTerry(policy, all_tuples, ids, options.fit));
  const std::vector<double> full_ranks = RankVector(full, ids);

  ScalabilityResult result;
  result.policy_id = policy;
  result.reports.resize(static_cast<std::size_t>(options.simulations) *
                        kFractionSteps);

  auto run_simulation = [&](int sim) {
    const std::uint64_t sim_seed =
        options.seed + static_cast<std::uint64_t>(sim);
    for (int step = 1; step <= kFractionSteps; ++step) {
      SamplingReport& report =
          result.reports[static_cast<std::size_t>(sim) * kFractionSteps +
                         static_cast<std::size_t>(step - 1)];
      report.policy_id = policy;
      report.simulation = sim;
      report.fraction = step / static_cast<double>(kFractionSteps);
      report.seed = DeriveSeed(sim_seed, static_cast<std::uint64_t>(step));
      const auto subset = SampleComparisons(decided, report.fraction, report.seed);
      const auto tuples = ExtractWinTuples(subset);
      const Ranking sample =
          RankFromModel(FitBradleyTerry(policy, tuples, ids, options.fit));
      const KendallResult tau = KendallTau(RankVector(sample, ids), full_ranks);
      report.tau = tau.tau;
      report.tau_p_value = tau.p_value;
      report.similarity = SimilarityCoefficient(sample, full);
    }
  };

  int threads = options.threads > 0
                    ? options.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, options.simulations);
  if (threads == 1) {
    for (int sim = 0; sim < options.simulations; ++sim) run_simulation(sim);
  } else {
    std::atomic<int> next_sim{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (int sim; (sim = next_sim.fetch_add(1)) < options.simulations;) {
          try {
            run_simulation(sim);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mu);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  for (int step = 1; step <= kFractionSteps; ++step) {
    std::vector<double> taus, sims;
    for (int sim = 0; sim < options.simulations; ++sim) {
      const auto& r =
          result.reports[static_cast<std::size_t>(sim) * kFractionSteps +
                         static_cast<std::size_t>(step - 1)];
      taus.push_back(r.tau);
      sims.push_back(r.similarity);
    }
    FractionSummary s;
    s.fraction = step / static_cast<double>(kFractionSteps);
    s.simulations = taus.size();
    s.tau_mean = Mean(taus);
    s.tau_sd = SampleStdDev(taus);
    s.similarity_mean = Mean(sims);
    s.similarity_sd = SampleStdDev(sims);
    result.summary.push_back(s);
  }
  return result;
}

void WriteSamplingReportCsv(std::ostream& os,
                            std::span<const SamplingReport> reports,
                            bool header) {
  if (header) {
    WriteCsvRow(os, {"policy_id", "simulation", "fraction", "tau", "p_value",
                     "similarity"});
  }
  for (const auto& r : reports) {
    WriteCsvRow(os, {r.policy_id.str(), std::to_string(r.simulation),
                     FormatDouble(r.fraction), FormatDouble(r.tau),
                     FormatDouble(r.tau_p_value), FormatDouble(r.similarity)});
  }
}

std::string ScalabilitySummaryToJson(const ScalabilityResult& result) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& s : result.summary) {
    rows.push_back({{"fraction", s.fraction},
                    {"simulations", s.simulations},
                    {"tau_mean", s.tau_mean},
                    {"tau_sd", s.tau_sd},
                    {"association", AssociationStrength(s.tau_mean)},
                    {"similarity_mean", s.similarity_mean},
                    {"similarity_sd", s.similarity_sd}});
  }
  return nlohmann::json{{"policy_id", result.policy_id.str()},
                        {"fractions", rows}}
      .dump(2);
}

}  // namespace tcrank
