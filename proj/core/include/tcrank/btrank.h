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

// Bradley-Terry ranking of statements from (winner, loser) tuples.
//
// Statement i beats j with probability a_i / (a_i + a_j), a_i = exp(theta_i).
// The fit maximizes the log-likelihood
//
//   sum_{i != j} (w_ij + r) * log(a_i / (a_i + a_j)),   r = alpha / (N - 1)
//
// where w_ij counts tuples (i, j) and N is the number of compared statements.
// The pseudo-count r acts as alpha virtual wins per statement spread evenly
// over its opponents, which keeps the optimum finite when the comparison
// graph is not strongly connected. The minorization-maximization update
//
//   a_i <- (W_i + alpha) / sum_{j != i} (n_ij + 2r) / (a_i + a_j)
//
// (W_i total wins, n_ij comparisons between i and j) is applied to all
// statements simultaneously and never decreases the objective. Abilities are
// re-centred after every step so that sum_i theta_i = 0. MM converges slowly
// on nearly separable data, so long fits switch to Newton steps (see
// FitOptions::newton_after).

#ifndef TCRANK_BTRANK_H_
#define TCRANK_BTRANK_H_

#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "tcrank/ids.h"
#include "tcrank/pairing.h"
#include "tcrank/stats.h"

namespace tcrank {

struct FitOptions {
  double alpha = 0.01;
  // On max |theta change| of one update.
  double tolerance = 1e-8;
  int max_iterations = 10000;
  // When the optimum is finite and MM has not converged after this many
  // updates, continue with Newton steps on the same objective (each
  // backtracked so the objective never decreases). 0 keeps pure MM.
  int newton_after = 200;
  // Keep the objective after every iteration in BTModel::trace.
  bool record_trace = false;
};

struct BTModel {
  PolicyId policy_id;
  std::map<StatementId, double> theta;
  int iterations = 0;
  bool converged = false;
  // max |theta change| of the last update.
  double residual = 0;
  double alpha = 0;
  // For alpha = 0: whether the win graph is strongly connected, the
  // condition for a finite maximum. Always true when alpha > 0.
  bool finite_optimum = true;
  // Statements without any tuple; they sit at theta = 0.
  std::vector<StatementId> uncompared;
  // Objective before the first update followed by one value per update.
  std::vector<double> trace;
};

// kNoData for an empty tuple list; kUnknownStatement when a tuple names a
// statement outside `statements`; kInvalidInput for alpha < 0 or
// tolerance <= 0. Non-convergence is reported through BTModel::converged.
BTModel FitBradleyTerry(const PolicyId& policy,
                        std::span<const WinTuple> tuples,
                        std::span<const StatementId> statements,
                        const FitOptions& options = {});

// The regularized objective above, over the statements named in `tuples`.
double BradleyTerryObjective(std::span<const WinTuple> tuples,
                             const std::map<StatementId, double>& theta,
                             double alpha);

// kUnknownStatement for ids missing from the model, kInvalidInput for i == j.
double WinProbability(const BTModel& model, const StatementId& i,
                      const StatementId& j);

struct Ranking {
  PolicyId policy_id;
  std::vector<StatementId> ordered;  // rank 1 first
  std::map<StatementId, std::size_t> rank_of;

  std::size_t size() const { return ordered.size(); }
  // kUnknownStatement when absent.
  std::size_t Rank(const StatementId& id) const;
  double RelativeRank(const StatementId& id) const;
};

// Descending theta, ties broken by ascending statement id.
Ranking RankFromModel(const BTModel& model);
Ranking RankFromScores(const PolicyId& policy,
                       const std::map<StatementId, double>& scores);

struct CorrelationChecks {
  // sum_score against rank(b) - rank(a).
  CorrelationResult score_vs_rank_difference;
  // percent agreement against |rank(b) - rank(a)|.
  CorrelationResult agreement_vs_abs_rank_difference;
};

// kInsufficientData below three comparisons.
CorrelationChecks RunCorrelationChecks(
    std::span<const AggregatedComparison> comparisons,
    const Ranking& ranking);

// policy_id,rank,statement_id,theta,text
void WriteRankingCsv(std::ostream& os, const BTModel& model,
                     const std::map<StatementId, std::string>& texts);
// Rankings by policy, ordered by the rank column.
std::map<PolicyId, Ranking> ReadRankingsCsv(std::istream& is);

std::string ModelToJson(const BTModel& model);
BTModel ModelFromJson(const std::string& json);

}  // namespace tcrank

#endif  // TCRANK_BTRANK_H_
