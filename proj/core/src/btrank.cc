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

#include "tcrank/btrank.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <Eigen/Dense>

#include "json.hpp"
#include "tcrank/csv.h"
#include "tcrank/error.h"

namespace tcrank {
namespace {

// Abilities are floored here so that a statement without wins (alpha = 0)
// does not turn the log-abilities into -inf.
constexpr double kMinAbility = 1e-300;

struct Problem {
  std::vector<StatementId> ids;          // compared statements, sorted
  std::vector<std::vector<double>> wins;  // wins[i][j]: i beat j
  std::vector<double> total_wins;
};

Problem BuildProblem(std::span<const WinTuple> tuples) {
  Problem p;
  std::set<StatementId> seen;
  for (const WinTuple& t : tuples) {
    seen.insert(t.winner);
    seen.insert(t.loser);
  }
  p.ids.assign(seen.begin(), seen.end());
  const std::size_t n = p.ids.size();
  p.wins.assign(n, std::vector<double>(n, 0.0));
  p.total_wins.assign(n, 0.0);
  auto index = [&](const StatementId& id) {
    return static_cast<std::size_t>(
        std::lower_bound(p.ids.begin(), p.ids.end(), id) - p.ids.begin());
  };
  for (const WinTuple& t : tuples) {
    const std::size_t w = index(t.winner);
    const std::size_t l = index(t.loser);
    p.wins[w][l] += 1.0;
    p.total_wins[w] += 1.0;
  }
  return p;
}

double Objective(const Problem& p, const std::vector<double>& theta,
                 double alpha) {
  const std::size_t n = p.ids.size();
  const double r = n > 1 ? alpha / static_cast<double>(n - 1) : 0.0;
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double weight = p.wins[i][j] + r;
      if (weight == 0) continue;
      // log(a_i / (a_i + a_j)) = -log(1 + exp(theta_j - theta_i))
      const double d = theta[j] - theta[i];
      total -= weight * (d > 0 ? d + std::log1p(std::exp(-d))
                               : std::log1p(std::exp(d)));
    }
  }
  return total;
}

bool StronglyConnected(const Problem& p) {
  const std::size_t n = p.ids.size();
  auto reaches_all = [&](bool forward) {
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack = {0};
    seen[0] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t u = 0; u < n; ++u) {
        const double w = forward ? p.wins[v][u] : p.wins[u][v];
        if (w > 0 && !seen[u]) {
          seen[u] = true;
          ++count;
          stack.push_back(u);
        }
      }
    }
    return count == n;
  };
  return reaches_all(true) && reaches_all(false);
}

void Recenter(std::vector<double>& theta) {
  double mean = 0;
  for (double t : theta) mean += t;
  mean /= static_cast<double>(theta.size());
  for (double& t : theta) t -= mean;
}

// One simultaneous MM update, re-centred.
std::vector<double> MmStep(const Problem& p, const std::vector<double>& theta,
                           double alpha) {
  const std::size_t n = p.ids.size();
  const double r = n > 1 ? alpha / static_cast<double>(n - 1) : 0.0;
  std::vector<double> ability(n);
  for (std::size_t i = 0; i < n; ++i) ability[i] = std::exp(theta[i]);
  std::vector<double> next(n);
  for (std::size_t i = 0; i < n; ++i) {
    double denom = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double count = p.wins[i][j] + p.wins[j][i] + 2 * r;
      if (count > 0) denom += count / (ability[i] + ability[j]);
    }
    const double numer = p.total_wins[i] + alpha;
    next[i] = std::log(denom > 0 ? std::max(numer / denom, kMinAbility)
                                 : ability[i]);
  }
  Recenter(next);
  return next;
}

double MmResidual(const Problem& p, const std::vector<double>& theta,
                  double alpha) {
  const std::vector<double> next = MmStep(p, theta, alpha);
  double residual = 0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    residual = std::max(residual, std::abs(next[i] - theta[i]));
  }
  return residual;
}

// Newton step on the concave objective with backtracking, so the objective
// never decreases. The Hessian is a weighted graph Laplacian; adding the
// all-ones matrix / n pins the step to the sum-zero gauge. `objective` holds
// the value at `theta` on entry and at the returned point on exit. Returns
// `theta` unchanged when no step length improves the objective.
std::vector<double> NewtonStep(const Problem& p, const std::vector<double>& theta,
                               double alpha, double& objective) {
  const auto n = static_cast<Eigen::Index>(p.ids.size());
  const double r = n > 1 ? alpha / static_cast<double>(n - 1) : 0.0;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd lap = Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
      const double cij = p.wins[ui][uj] + r, cji = p.wins[uj][ui] + r;
      const double m = cij + cji;
      if (m == 0) continue;
      const double pij = 1.0 / (1.0 + std::exp(theta[uj] - theta[ui]));
      grad[i] += cij - m * pij;
      grad[j] += cji - m * (1 - pij);
      const double w = m * pij * (1 - pij);
      lap(i, j) -= w;
      lap(j, i) -= w;
      lap(i, i) += w;
      lap(j, j) += w;
    }
  }
  const Eigen::VectorXd step = lap.ldlt().solve(grad);
  std::vector<double> trial(theta.size());
  for (double t = 1.0; t > 1e-10; t /= 2) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
      trial[i] = theta[i] + t * step[static_cast<Eigen::Index>(i)];
    }
    Recenter(trial);
    const double value = Objective(p, trial, alpha);
    if (value >= objective) {
      objective = value;
      return trial;
    }
  }
  return theta;
}

}  // namespace

BTModel FitBradleyTerry(const PolicyId& policy,
                        std::span<const WinTuple> tuples,
                        std::span<const StatementId> statements,
                        const FitOptions& options) {
  if (tuples.empty()) {
    throw Error(ErrorCode::kNoData,
                "no win tuples for policy " + policy.str());
  }
  if (!(options.alpha >= 0) || !(options.tolerance > 0)) {
    throw Error(ErrorCode::kInvalidInput,
                "alpha must be >= 0 and tolerance > 0");
  }
  const std::set<StatementId> known(statements.begin(), statements.end());
  for (const WinTuple& t : tuples) {
    for (const StatementId* id : {&t.winner, &t.loser}) {
      if (!known.contains(*id)) {
        throw Error(ErrorCode::kUnknownStatement,
                    "tuple references unknown statement " + id->str());
      }
    }
    if (t.winner == t.loser) {
      throw Error(ErrorCode::kInvalidInput,
                  "statement " + t.winner.str() + " compared with itself");
    }
  }

  const Problem p = BuildProblem(tuples);
  const std::size_t n = p.ids.size();

  BTModel model;
  model.policy_id = policy;
  model.alpha = options.alpha;
  model.finite_optimum = options.alpha > 0 || StronglyConnected(p);

  std::vector<double> theta(n, 0.0);
  double objective = Objective(p, theta, options.alpha);
  if (options.record_trace) model.trace.push_back(objective);

  const bool use_newton = options.newton_after > 0 && model.finite_optimum;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    std::vector<double> updated;
    if (use_newton && iter >= options.newton_after) {
      updated = NewtonStep(p, theta, options.alpha, objective);
    } else {
      updated = MmStep(p, theta, options.alpha);
      if (options.record_trace || (use_newton && iter + 1 >= options.newton_after)) {
        objective = Objective(p, updated, options.alpha);
      }
    }
    double change = 0;
    for (std::size_t i = 0; i < n; ++i) {
      change = std::max(change, std::abs(updated[i] - theta[i]));
    }
    theta = std::move(updated);
    model.iterations = iter + 1;
    if (options.record_trace) model.trace.push_back(objective);
    // Converged means a further MM step would move no ability by more than
    // the tolerance; after an MM step that is the step just taken.
    model.residual = (use_newton && iter >= options.newton_after)
                         ? MmResidual(p, theta, options.alpha)
                         : change;
    if (model.residual < options.tolerance) {
      model.converged = true;
      break;
    }
    if (change == 0 && use_newton && iter >= options.newton_after) break;
  }

  for (std::size_t i = 0; i < n; ++i) model.theta[p.ids[i]] = theta[i];
  // Uncompared statements take the prior mean; the compared ones already sum
  // to zero so the gauge is preserved.
  for (const StatementId& id : known) {
    if (!model.theta.contains(id)) {
      model.theta[id] = 0.0;
      model.uncompared.push_back(id);
    }
  }
  return model;
}

double BradleyTerryObjective(std::span<const WinTuple> tuples,
                             const std::map<StatementId, double>& theta,
                             double alpha) {
  const Problem p = BuildProblem(tuples);
  std::vector<double> values;
  values.reserve(p.ids.size());
  for (const StatementId& id : p.ids) {
    const auto it = theta.find(id);
    if (it == theta.end()) {
      throw Error(ErrorCode::kUnknownStatement, id.str());
    }
    values.push_back(it->second);
  }
  return Objective(p, values, alpha);
}

double WinProbability(const BTModel& model, const StatementId& i,
                      const StatementId& j) {
  if (i == j) throw Error(ErrorCode::kInvalidInput, "i and j must differ");
  const auto ti = model.theta.find(i);
  const auto tj = model.theta.find(j);
  if (ti == model.theta.end() || tj == model.theta.end()) {
    throw Error(ErrorCode::kUnknownStatement,
                (ti == model.theta.end() ? i : j).str());
  }
  // a_i / (a_i + a_j) = 1 / (1 + exp(theta_j - theta_i))
  return 1.0 / (1.0 + std::exp(tj->second - ti->second));
}

std::size_t Ranking::Rank(const StatementId& id) const {
  const auto it = rank_of.find(id);
  if (it == rank_of.end()) {
    throw Error(ErrorCode::kUnknownStatement, "no rank for " + id.str());
  }
  return it->second;
}

double Ranking::RelativeRank(const StatementId& id) const {
  return static_cast<double>(Rank(id)) / static_cast<double>(ordered.size());
}

Ranking RankFromScores(const PolicyId& policy,
                       const std::map<StatementId, double>& scores) {
  Ranking ranking;
  ranking.policy_id = policy;
  std::vector<std::pair<StatementId, double>> items(scores.begin(),
                                                    scores.end());
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& x, const auto& y) {
                     if (x.second != y.second) return x.second > y.second;
                     return x.first < y.first;
                   });
  for (std::size_t i = 0; i < items.size(); ++i) {
    ranking.ordered.push_back(items[i].first);
    ranking.rank_of[items[i].first] = i + 1;
  }
  return ranking;
}

Ranking RankFromModel(const BTModel& model) {
  return RankFromScores(model.policy_id, model.theta);
}

CorrelationChecks RunCorrelationChecks(
    std::span<const AggregatedComparison> comparisons,
    const Ranking& ranking) {
  if (comparisons.size() < 3) {
    throw Error(ErrorCode::kInsufficientData,
                "correlation checks need at least 3 comparisons");
  }
  std::vector<double> score, agreement, diff, abs_diff;
  for (const auto& c : comparisons) {
    const double d = static_cast<double>(ranking.Rank(c.pair.b)) -
                     static_cast<double>(ranking.Rank(c.pair.a));
    score.push_back(c.sum_score);
    agreement.push_back(c.percent_agreement());
    diff.push_back(d);
    abs_diff.push_back(std::abs(d));
  }
  return {Pearson(score, diff), Pearson(agreement, abs_diff)};
}

void WriteRankingCsv(std::ostream& os, const BTModel& model,
                     const std::map<StatementId, std::string>& texts) {
  const Ranking ranking = RankFromModel(model);
  WriteCsvRow(os, {"policy_id", "rank", "statement_id", "theta", "text"});
  for (std::size_t i = 0; i < ranking.ordered.size(); ++i) {
    const StatementId& id = ranking.ordered[i];
    const auto text = texts.find(id);
    WriteCsvRow(os, {model.policy_id.str(), std::to_string(i + 1), id.str(),
                     FormatDouble(model.theta.at(id)),
                     text == texts.end() ? std::string() : text->second});
  }
}

std::map<PolicyId, Ranking> ReadRankingsCsv(std::istream& is) {
  const CsvTable table = CsvTable::Parse(is);
  const std::size_t policy_col = table.Column("policy_id");
  const std::size_t rank_col = table.Column("rank");
  const std::size_t id_col = table.Column("statement_id");
  std::map<PolicyId, std::vector<std::pair<std::size_t, StatementId>>> rows;
  for (const CsvRow& row : table.rows()) {
    rows[PolicyId(row[policy_col])].emplace_back(std::stoul(row[rank_col]),
                                                 StatementId(row[id_col]));
  }
  std::map<PolicyId, Ranking> out;
  for (auto& [policy, entries] : rows) {
    std::sort(entries.begin(), entries.end());
    Ranking& ranking = out[policy];
    ranking.policy_id = policy;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].first != i + 1) {
        throw Error(ErrorCode::kParseError,
                    "ranks of policy " + policy.str() + " are not 1..N");
      }
      ranking.ordered.push_back(entries[i].second);
      ranking.rank_of[entries[i].second] = i + 1;
    }
  }
  return out;
}

std::string ModelToJson(const BTModel& model) {
  nlohmann::json theta = nlohmann::json::object();
  for (const auto& [id, value] : model.theta) theta[id.str()] = value;
  nlohmann::json uncompared = nlohmann::json::array();
  for (const auto& id : model.uncompared) uncompared.push_back(id.str());
  const nlohmann::json j = {{"policy_id", model.policy_id.str()},
                            {"theta", theta},
                            {"alpha", model.alpha},
                            {"iterations", model.iterations},
                            {"converged", model.converged},
                            {"residual", model.residual},
                            {"finite_optimum", model.finite_optimum},
                            {"uncompared", uncompared}};
  return j.dump(2);
}

BTModel ModelFromJson(const std::string& json) {
  try {
    const auto j = nlohmann::json::parse(json);
    BTModel model;
    model.policy_id = PolicyId(j.at("policy_id").get<std::string>());
    for (const auto& [id, value] : j.at("theta").items()) {
      model.theta[StatementId(id)] = value.get<double>();
    }
    model.alpha = j.at("alpha").get<double>();
    model.iterations = j.at("iterations").get<int>();
    model.converged = j.at("converged").get<bool>();
    model.residual = j.value("residual", 0.0);
    model.finite_optimum = j.value("finite_optimum", true);
    for (const auto& id : j.value("uncompared", nlohmann::json::array())) {
      model.uncompared.emplace_back(id.get<std::string>());
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
}

}  // namespace tcrank
