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

#include "tcrank/pairing.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

#include "tcrank/coverage.h"
#include "tcrank/csv.h"
#include "tcrank/error.h"

namespace tcrank {

PairKey PairKey::Of(StatementId x, StatementId y) {
  if (x == y) {
    throw Error(ErrorCode::kInvalidInput,
                "a pair needs two distinct statements, got " + x.str());
  }
  if (y < x) std::swap(x, y);
  return PairKey{std::move(x), std::move(y)};
}

std::string_view PresentationName(Presentation p) {
  return p == Presentation::kAB ? "AB" : "BA";
}

std::string_view HitStatusName(HitStatus s) {
  switch (s) {
    case HitStatus::kOpen: return "open";
    case HitStatus::kAssigned: return "assigned";
    case HitStatus::kCompleted: return "completed";
  }
  return "?";
}

std::string_view ChoiceName(Choice c) {
  switch (c) {
    case Choice::kFirst: return "first";
    case Choice::kEqual: return "equal";
    case Choice::kSecond: return "second";
  }
  return "?";
}

std::string_view OutcomeName(Outcome o) {
  switch (o) {
    case Outcome::kAWins: return "AWins";
    case Outcome::kBWins: return "BWins";
    case Outcome::kDropped: return "Dropped";
  }
  return "?";
}

Choice ParseChoice(std::string_view text) {
  if (text == "first") return Choice::kFirst;
  if (text == "equal") return Choice::kEqual;
  if (text == "second") return Choice::kSecond;
  throw Error(ErrorCode::kInvalidChoice,
              "choice must be first, equal or second, got '" +
                  std::string(text) + "'");
}

Outcome ParseOutcome(std::string_view text) {
  if (text == "AWins") return Outcome::kAWins;
  if (text == "BWins") return Outcome::kBWins;
  if (text == "Dropped") return Outcome::kDropped;
  throw Error(ErrorCode::kParseError,
              "unknown outcome '" + std::string(text) + "'");
}

std::vector<PairKey> EnumeratePairs(std::span<const StatementId> statements) {
  std::vector<StatementId> ids(statements.begin(), statements.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.size() < 2) {
    throw Error(ErrorCode::kNotEnoughStatements,
                "pairing needs at least 2 statements, got " +
                    std::to_string(ids.size()));
  }
  std::vector<PairKey> pairs;
  pairs.reserve(ids.size() * (ids.size() - 1) / 2);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      pairs.push_back(PairKey{ids[i], ids[j]});
    }
  }
  return pairs;
}

std::vector<PairKey> EnumeratePairs(const PolicyDocument& doc) {
  std::vector<StatementId> ids;
  ids.reserve(doc.statements.size());
  for (const Statement& st : doc.statements) ids.push_back(st.id);
  return EnumeratePairs(ids);
}

HitId MakeHitId(const PairKey& pair, int slot) {
  return HitId(pair.a.str() + "|" + pair.b.str() + "|" + std::to_string(slot));
}

std::vector<Hit> GenerateHits(std::span<const PairKey> pairs, double fraction,
                              std::uint64_t seed) {
  if (pairs.empty()) throw Error(ErrorCode::kEmptyInput, "no pairs");
  const std::size_t count = RoundHalfUp(fraction, pairs.size());

  std::map<StatementId, std::size_t> vertex;
  for (const PairKey& p : pairs) {
    vertex.emplace(p.a, 0);
    vertex.emplace(p.b, 0);
  }
  std::size_t next = 0;
  for (auto& [id, index] : vertex) index = next++;
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (const PairKey& p : pairs) edges.emplace_back(vertex[p.a], vertex[p.b]);

  std::vector<std::size_t> chosen =
      SampleCoveringEdges(vertex.size(), edges, count, seed);
  std::sort(chosen.begin(), chosen.end(),
            [&](std::size_t x, std::size_t y) { return pairs[x] < pairs[y]; });

  std::vector<Hit> hits;
  hits.reserve(chosen.size() * kVotesPerPair);
  for (std::size_t index : chosen) {
    for (int slot = 1; slot <= kVotesPerPair; ++slot) {
      Hit hit;
      hit.pair = pairs[index];
      hit.slot = slot;
      hit.presentation =
          slot <= kSlotsPerPresentation ? Presentation::kAB : Presentation::kBA;
      hit.id = MakeHitId(hit.pair, slot);
      hits.push_back(std::move(hit));
    }
  }
  return hits;
}

int CanonicalScore(Presentation presentation, Choice choice) {
  if (choice == Choice::kEqual) return 0;
  const bool first = choice == Choice::kFirst;
  return (first == (presentation == Presentation::kAB)) ? 1 : -1;
}

Vote CanonicalizeVote(const Hit& hit, Choice choice,
                      std::int64_t timestamp_ms) {
  if (hit.status != HitStatus::kAssigned || !hit.worker) {
    throw Error(ErrorCode::kInvalidState,
                "hit " + hit.id.str() + " is not assigned to a worker");
  }
  Vote vote;
  vote.hit_id = hit.id;
  vote.worker_id = *hit.worker;
  vote.pair = hit.pair;
  vote.presentation = hit.presentation;
  vote.choice = choice;
  vote.canonical_score = CanonicalScore(hit.presentation, choice);
  vote.timestamp_ms = timestamp_ms;
  return vote;
}

AggregatedComparison AggregateScores(
    const PolicyId& policy, const PairKey& pair,
    const std::array<int, kVotesPerPair>& scores) {
  AggregatedComparison out;
  out.policy_id = policy;
  out.pair = pair;
  out.scores = scores;
  std::array<int, 3> counts{};  // -1, 0, +1
  for (int s : scores) {
    if (s < -1 || s > 1) {
      throw Error(ErrorCode::kInvalidInput,
                  "canonical scores must be -1, 0 or 1, got " +
                      std::to_string(s));
    }
    out.sum_score += s;
    ++counts[static_cast<std::size_t>(s + 1)];
  }
  out.modal_count = *std::max_element(counts.begin(), counts.end());
  out.outcome = out.sum_score > 0   ? Outcome::kAWins
                : out.sum_score < 0 ? Outcome::kBWins
                                    : Outcome::kDropped;
  return out;
}

AggregatedComparison AggregatePair(const PolicyId& policy,
                                   std::span<const Vote> votes) {
  if (votes.size() != kVotesPerPair) {
    throw Error(ErrorCode::kIncompleteComparison,
                "expected 6 votes, got " + std::to_string(votes.size()));
  }
  std::set<WorkerId> workers;
  std::array<int, kVotesPerPair> scores{};
  for (std::size_t i = 0; i < votes.size(); ++i) {
    if (votes[i].pair != votes[0].pair) {
      throw Error(ErrorCode::kIncompleteComparison,
                  "votes span more than one pair");
    }
    if (!workers.insert(votes[i].worker_id).second) {
      throw Error(ErrorCode::kIncompleteComparison,
                  "worker " + votes[i].worker_id.str() + " voted twice");
    }
    scores[i] = votes[i].canonical_score;
  }
  return AggregateScores(policy, votes[0].pair, scores);
}

std::vector<WinTuple> ExtractWinTuples(
    std::span<const AggregatedComparison> comparisons) {
  std::vector<WinTuple> tuples;
  for (const auto& c : comparisons) {
    if (c.outcome == Outcome::kAWins) tuples.push_back({c.pair.a, c.pair.b});
    if (c.outcome == Outcome::kBWins) tuples.push_back({c.pair.b, c.pair.a});
  }
  return tuples;
}

AgreementSummary SummarizeAgreement(
    std::span<const AggregatedComparison> comparisons) {
  if (comparisons.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no comparisons to summarize");
  }
  AgreementSummary summary;
  summary.count = comparisons.size();
  std::vector<double> agreement;
  agreement.reserve(comparisons.size());
  std::array<std::size_t, 4> at_least{};
  for (const auto& c : comparisons) {
    agreement.push_back(c.percent_agreement());
    for (int k = 3; k <= kVotesPerPair; ++k) {
      if (c.modal_count >= k) ++at_least[static_cast<std::size_t>(k - 3)];
    }
  }
  summary.mean = Mean(agreement);
  summary.quartiles = Summarize(agreement);
  for (std::size_t i = 0; i < at_least.size(); ++i) {
    summary.fraction_at_least[i] = static_cast<double>(at_least[i]) /
                                   static_cast<double>(comparisons.size());
  }
  return summary;
}

std::vector<AggregatedComparison> SortedByAgreement(
    std::span<const AggregatedComparison> comparisons) {
  std::vector<AggregatedComparison> out(comparisons.begin(), comparisons.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    if (x.modal_count != y.modal_count) return x.modal_count < y.modal_count;
    if (x.policy_id != y.policy_id) return x.policy_id < y.policy_id;
    return x.pair < y.pair;
  });
  return out;
}

void WriteComparisonsCsv(std::ostream& os,
                         std::span<const AggregatedComparison> comparisons) {
  CsvRow header = {"policy_id", "statement_a", "statement_b"};
  for (int i = 1; i <= kVotesPerPair; ++i) {
    header.push_back("score_" + std::to_string(i));
  }
  header.insert(header.end(), {"sum", "agreement", "outcome"});
  WriteCsvRow(os, header);
  for (const auto& c : comparisons) {
    CsvRow row = {c.policy_id.str(), c.pair.a.str(), c.pair.b.str()};
    for (int s : c.scores) row.push_back(std::to_string(s));
    row.push_back(std::to_string(c.sum_score));
    row.push_back(FormatDouble(c.percent_agreement()));
    row.push_back(std::string(OutcomeName(c.outcome)));
    WriteCsvRow(os, row);
  }
}

std::vector<AggregatedComparison> ReadComparisonsCsv(std::istream& is) {
  const CsvTable table = CsvTable::Parse(is);
  const std::size_t policy = table.Column("policy_id");
  const std::size_t col_a = table.Column("statement_a");
  const std::size_t col_b = table.Column("statement_b");
  std::array<std::size_t, kVotesPerPair> score_cols{};
  for (int i = 0; i < kVotesPerPair; ++i) {
    score_cols[static_cast<std::size_t>(i)] =
        table.Column("score_" + std::to_string(i + 1));
  }
  const bool has_sum = table.HasColumn("sum");
  const bool has_agreement = table.HasColumn("agreement");
  const bool has_outcome = table.HasColumn("outcome");

  std::vector<AggregatedComparison> out;
  out.reserve(table.rows().size());
  std::size_t line = 1;
  for (const CsvRow& row : table.rows()) {
    ++line;
    auto fail = [&](const std::string& what) {
      throw Error(ErrorCode::kParseError,
                  "comparisons line " + std::to_string(line) + ": " + what);
    };
    std::array<int, kVotesPerPair> scores{};
    try {
      for (std::size_t i = 0; i < scores.size(); ++i) {
        scores[i] = std::stoi(row[score_cols[i]]);
      }
    } catch (const std::exception&) {
      fail("non-integer score");
    }
    StatementId a(row[col_a]);
    StatementId b(row[col_b]);
    if (!(a < b)) {
      // Re-orient to canonical order; scores are relative to the first id.
      if (a == b) fail("identical statements");
      std::swap(a, b);
      for (int& s : scores) s = -s;
    }
    AggregatedComparison c =
        AggregateScores(PolicyId(row[policy]), PairKey{a, b}, scores);
    const bool flipped = StatementId(row[col_a]) != c.pair.a;
    if (has_sum) {
      const int stored = std::stoi(row[table.Column("sum")]);
      if ((flipped ? -stored : stored) != c.sum_score) fail("sum mismatch");
    }
    if (has_agreement) {
      const double stored = std::stod(row[table.Column("agreement")]);
      if (std::abs(stored - c.percent_agreement()) > 5e-3) {
        fail("agreement mismatch");
      }
    }
    if (has_outcome && !flipped &&
        ParseOutcome(row[table.Column("outcome")]) != c.outcome) {
      fail("outcome mismatch");
    }
    out.push_back(std::move(c));
  }
  return out;
}

void WriteWinTuplesCsv(std::ostream& os,
                       std::span<const AggregatedComparison> comparisons) {
  WriteCsvRow(os, {"policy_id", "winner", "loser"});
  for (const auto& c : comparisons) {
    if (c.outcome == Outcome::kDropped) continue;
    const bool a_wins = c.outcome == Outcome::kAWins;
    WriteCsvRow(os, {c.policy_id.str(), (a_wins ? c.pair.a : c.pair.b).str(),
                     (a_wins ? c.pair.b : c.pair.a).str()});
  }
}

}  // namespace tcrank
