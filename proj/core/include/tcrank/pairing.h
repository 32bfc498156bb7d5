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

// Statement pairs, crowd tasks (HITs) and vote aggregation.
//
// Every pair is stored in canonical orientation (a < b by statement id) and
// all scores are expressed relative to `a`: +1 means a was judged more
// important, -1 means b was, 0 means equal. Each pair is shown to six
// distinct workers, three times as (a, b) and three times as (b, a).

#ifndef TCRANK_PAIRING_H_
#define TCRANK_PAIRING_H_

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "tcrank/corpus.h"
#include "tcrank/ids.h"
#include "tcrank/stats.h"

namespace tcrank {

inline constexpr int kVotesPerPair = 6;
inline constexpr int kSlotsPerPresentation = kVotesPerPair / 2;

struct PairKey {
  StatementId a;
  StatementId b;

  // Orders the two ids; throws kInvalidInput when they are equal.
  static PairKey Of(StatementId x, StatementId y);

  friend auto operator<=>(const PairKey&, const PairKey&) = default;
  friend bool operator==(const PairKey&, const PairKey&) = default;
};

enum class Presentation { kAB, kBA };
enum class HitStatus { kOpen, kAssigned, kCompleted };
enum class Choice { kFirst, kEqual, kSecond };
enum class Outcome { kAWins, kBWins, kDropped };

std::string_view PresentationName(Presentation p);
std::string_view HitStatusName(HitStatus s);
std::string_view ChoiceName(Choice c);
std::string_view OutcomeName(Outcome o);

// Accepts "first", "equal" or "second"; kInvalidChoice otherwise.
Choice ParseChoice(std::string_view text);
Outcome ParseOutcome(std::string_view text);

struct Hit {
  HitId id;
  PairKey pair;
  Presentation presentation = Presentation::kAB;
  int slot = 1;  // 1..3 are AB, 4..6 are BA.
  HitStatus status = HitStatus::kOpen;
  std::optional<WorkerId> worker;
};

struct Vote {
  HitId hit_id;
  WorkerId worker_id;
  PairKey pair;
  Presentation presentation = Presentation::kAB;
  Choice choice = Choice::kEqual;
  int canonical_score = 0;
  std::int64_t timestamp_ms = 0;
};

struct AggregatedComparison {
  PolicyId policy_id;
  PairKey pair;
  std::array<int, kVotesPerPair> scores{};
  int sum_score = 0;
  // Multiplicity of the most frequent score; percent agreement is this / 6.
  int modal_count = 0;
  Outcome outcome = Outcome::kDropped;

  double percent_agreement() const {
    return static_cast<double>(modal_count) / kVotesPerPair;
  }
};

struct WinTuple {
  StatementId winner;
  StatementId loser;

  friend bool operator==(const WinTuple&, const WinTuple&) = default;
};

// All unordered pairs in ascending order; kNotEnoughStatements when N < 2.
std::vector<PairKey> EnumeratePairs(const PolicyDocument& doc);
std::vector<PairKey> EnumeratePairs(std::span<const StatementId> statements);

// "<a>|<b>|<slot>", unique across the platform.
HitId MakeHitId(const PairKey& pair, int slot);

// Samples RoundHalfUp(fraction * |pairs|) pairs covering every statement that
// occurs in `pairs`, then emits six open Hits per pair (slots 1-3 AB, 4-6 BA),
// ordered by pair and slot.
std::vector<Hit> GenerateHits(std::span<const PairKey> pairs, double fraction,
                              std::uint64_t seed);

int CanonicalScore(Presentation presentation, Choice choice);

// Requires hit.status == kAssigned with a worker (kInvalidState otherwise).
Vote CanonicalizeVote(const Hit& hit, Choice choice,
                      std::int64_t timestamp_ms = 0);

// Requires exactly six votes on one pair from six distinct workers
// (kIncompleteComparison otherwise). Scores keep the order of `votes`.
AggregatedComparison AggregatePair(const PolicyId& policy,
                                   std::span<const Vote> votes);

// Aggregation from already canonical scores, each in {-1, 0, 1}
// (kInvalidInput otherwise).
AggregatedComparison AggregateScores(const PolicyId& policy,
                                     const PairKey& pair,
                                     const std::array<int, kVotesPerPair>& scores);

// One tuple per non-dropped comparison, in input order.
std::vector<WinTuple> ExtractWinTuples(
    std::span<const AggregatedComparison> comparisons);

struct AgreementSummary {
  std::size_t count = 0;
  double mean = 0;
  FiveNumberSummary quartiles;
  // fraction_at_least[k - 3]: share of comparisons whose modal count >= k,
  // for k = 3..6.
  std::array<double, 4> fraction_at_least{};
};

// kEmptyInput when there are no comparisons.
AgreementSummary SummarizeAgreement(
    std::span<const AggregatedComparison> comparisons);

// Comparisons ordered by ascending agreement (then by pair), for manual
// inspection of the least agreed pairs.
std::vector<AggregatedComparison> SortedByAgreement(
    std::span<const AggregatedComparison> comparisons);

// CSV header:
// policy_id,statement_a,statement_b,score_1,...,score_6,sum,agreement,outcome
void WriteComparisonsCsv(std::ostream& os,
                         std::span<const AggregatedComparison> comparisons);
// Re-derives sum, agreement and outcome from the six scores and rejects rows
// whose stored values disagree (kParseError).
std::vector<AggregatedComparison> ReadComparisonsCsv(std::istream& is);

// CSV header: policy_id,winner,loser
void WriteWinTuplesCsv(std::ostream& os,
                       std::span<const AggregatedComparison> comparisons);

}  // namespace tcrank

#endif  // TCRANK_PAIRING_H_
