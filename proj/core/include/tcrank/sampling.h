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

// How much of the comparison data a ranking needs: subsample comparisons,
// refit, and compare against the full-data ranking.

#ifndef TCRANK_SAMPLING_H_
#define TCRANK_SAMPLING_H_

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tcrank/btrank.h"
#include "tcrank/pairing.h"

namespace tcrank {

struct KendallResult {
  double tau = 0;
  double p_value = 1;
  std::size_t n = 0;
};

// Kendall tau-b (equal to tau-a without ties), computed in O(n log n) by
// Knight's merge-sort method. The p-value uses the normal approximation of
// Kendall's S with the tie-corrected variance. When either input is constant
// tau = 0 and p = 1. kInvalidInput for length mismatch or n < 2.
KendallResult KendallTau(std::span<const double> x, std::span<const double> y);

// "strong" for |tau| > 0.35, "medium" for |tau| > 0.2, otherwise "weak".
std::string_view AssociationStrength(double tau);

// ceil(0.2 * n).
std::size_t TopSetSize(std::size_t n);

// Overlap of the two top-20% sets as a fraction of the top-set size.
// kInvalidInput when the rankings cover different statements.
double SimilarityCoefficient(const Ranking& sample, const Ranking& full);

// Uniform sample of RoundHalfUp(fraction * M) comparisons in which every
// statement still appears; returned in input order. CoverageInfeasibleError
// when the size is too small to cover all statements.
std::vector<AggregatedComparison> SampleComparisons(
    std::span<const AggregatedComparison> comparisons, double fraction,
    std::uint64_t seed);

struct SamplingReport {
  PolicyId policy_id;
  int simulation = 0;
  double fraction = 0;
  double tau = 0;
  double tau_p_value = 1;
  double similarity = 0;
  std::uint64_t seed = 0;
};

struct FractionSummary {
  double fraction = 0;
  std::size_t simulations = 0;
  double tau_mean = 0;
  double tau_sd = 0;
  double similarity_mean = 0;
  double similarity_sd = 0;
};

struct ScalabilityOptions {
  int simulations = 100;
  std::uint64_t seed = 1;
  // 0 selects std::thread::hardware_concurrency().
  int threads = 0;
  FitOptions fit;
};

struct ScalabilityResult {
  PolicyId policy_id;
  std::vector<SamplingReport> reports;   // ordered by simulation, fraction
  std::vector<FractionSummary> summary;  // fractions 0.1 .. 1.0
};

// For every simulation s (seed + s) and fraction 0.1, 0.2, ..., 1.0: sample
// the non-dropped comparisons, refit, and compare the rank vectors with the
// full-data ranking. Results do not depend on the thread count.
ScalabilityResult RunScalabilityExperiment(
    const PolicyId& policy, std::span<const AggregatedComparison> comparisons,
    std::span<const StatementId> statements,
    const ScalabilityOptions& options = {});

// policy_id,simulation,fraction,tau,p_value,similarity
void WriteSamplingReportCsv(std::ostream& os,
                            std::span<const SamplingReport> reports,
                            bool header = true);
std::string ScalabilitySummaryToJson(const ScalabilityResult& result);

}  // namespace tcrank

#endif  // TCRANK_SAMPLING_H_
