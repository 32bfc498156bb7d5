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

#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "support/synthetic.h"
#include "tcrank/coverage.h"
#include "tcrank/error.h"

namespace tcrank {
namespace {

constexpr std::array<Choice, 3> kChoices = {Choice::kFirst, Choice::kEqual,
                                            Choice::kSecond};

PolicyDocument Doc(std::size_t n) {
  return SegmentPolicy(PolicyId("p"), "", testing::SyntheticPolicyText(n));
}

PairKey Pair(const char* a, const char* b) {
  return PairKey::Of(StatementId(a), StatementId(b));
}

TEST(PairKeyTest, CanonicalOrientation) {
  const PairKey k = Pair("p#0002", "p#0001");
  EXPECT_EQ(k.a.str(), "p#0001");
  EXPECT_EQ(k.b.str(), "p#0002");
  EXPECT_THROW(Pair("x", "x"), Error);
}

TEST(EnumeratePairsTest, CountsAndOrder) {
  EXPECT_EQ(EnumeratePairs(Doc(2)).size(), 1u);
  const auto pairs39 = EnumeratePairs(Doc(39));
  EXPECT_EQ(pairs39.size(), 741u);
  EXPECT_TRUE(std::is_sorted(pairs39.begin(), pairs39.end()));
  EXPECT_EQ(std::set<PairKey>(pairs39.begin(), pairs39.end()).size(), 741u);
  EXPECT_EQ(EnumeratePairs(Doc(44)).size(), 946u);
  try {
    EnumeratePairs(Doc(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotEnoughStatements);
  }
}

TEST(GenerateHitsTest, TableCounts) {
  EXPECT_EQ(GenerateHits(EnumeratePairs(Doc(39)), 1.0, 1).size(), 4446u);
  EXPECT_EQ(GenerateHits(EnumeratePairs(Doc(44)), 1.0, 1).size(), 5676u);
  EXPECT_EQ(GenerateHits(EnumeratePairs(Doc(32)), 0.5, 1).size(), 1488u);
}

TEST(GenerateHitsTest, SlotsPresentationsAndCoverage) {
  const auto doc = Doc(12);
  const auto pairs = EnumeratePairs(doc);
  const auto hits = GenerateHits(pairs, 0.3, 42);
  ASSERT_EQ(hits.size(), 6u * RoundHalfUp(0.3, pairs.size()));
  std::map<PairKey, std::vector<const Hit*>> by_pair;
  std::set<std::string> ids;
  for (const auto& h : hits) {
    by_pair[h.pair].push_back(&h);
    ids.insert(h.id.str());
    EXPECT_EQ(h.status, HitStatus::kOpen);
    EXPECT_FALSE(h.worker.has_value());
    EXPECT_EQ(h.id, MakeHitId(h.pair, h.slot));
  }
  EXPECT_EQ(ids.size(), hits.size());
  std::set<StatementId> covered;
  for (const auto& [pair, group] : by_pair) {
    ASSERT_EQ(group.size(), 6u);
    int ab = 0;
    for (const Hit* h : group) {
      ab += h->presentation == Presentation::kAB;
      EXPECT_EQ(h->presentation,
                h->slot <= 3 ? Presentation::kAB : Presentation::kBA);
    }
    EXPECT_EQ(ab, 3);
    covered.insert(pair.a);
    covered.insert(pair.b);
  }
  EXPECT_EQ(covered.size(), doc.statements.size());
}

TEST(GenerateHitsTest, DeterministicPerSeed) {
  const auto pairs = EnumeratePairs(Doc(10));
  const auto a = GenerateHits(pairs, 0.5, 3);
  const auto b = GenerateHits(pairs, 0.5, 3);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].id, b[i].id);
  const auto c = GenerateHits(pairs, 0.5, 4);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs |= !(a[i].id == c[i].id);
  EXPECT_TRUE(differs);
}

TEST(GenerateHitsTest, SinglePairAndInfeasibleFraction) {
  const auto one = GenerateHits(EnumeratePairs(Doc(2)), 1.0, 1);
  ASSERT_EQ(one.size(), 6u);
  EXPECT_EQ(std::count_if(one.begin(), one.end(),
                          [](const Hit& h) {
                            return h.presentation == Presentation::kBA;
                          }),
            3);
  // 10 statements need at least 5 pairs; 10% of 45 rounds to 5 (ok), 5% to 2.
  const auto pairs = EnumeratePairs(Doc(10));
  EXPECT_EQ(GenerateHits(pairs, 0.1, 1).size(), 30u);
  try {
    GenerateHits(pairs, 0.05, 1);
    FAIL();
  } catch (const CoverageInfeasibleError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCoverageInfeasible);
    EXPECT_EQ(e.minimum_feasible(), 5u);
  }
  EXPECT_THROW(GenerateHits(pairs, 0.0, 1), Error);
  EXPECT_THROW(GenerateHits(pairs, 1.5, 1), Error);
}

TEST(CanonicalScoreTest, Definition) {
  EXPECT_EQ(CanonicalScore(Presentation::kAB, Choice::kFirst), 1);
  EXPECT_EQ(CanonicalScore(Presentation::kAB, Choice::kSecond), -1);
  EXPECT_EQ(CanonicalScore(Presentation::kAB, Choice::kEqual), 0);
  EXPECT_EQ(CanonicalScore(Presentation::kBA, Choice::kFirst), -1);
  EXPECT_EQ(CanonicalScore(Presentation::kBA, Choice::kSecond), 1);
  EXPECT_EQ(CanonicalScore(Presentation::kBA, Choice::kEqual), 0);
}

TEST(ParseChoiceTest, ThreeOptionsOnly) {
  EXPECT_EQ(ParseChoice("first"), Choice::kFirst);
  EXPECT_EQ(ParseChoice("equal"), Choice::kEqual);
  EXPECT_EQ(ParseChoice("second"), Choice::kSecond);
  for (const char* bad : {"", "First", "tie", "both"}) {
    try {
      ParseChoice(bad);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidChoice);
    }
  }
}

TEST(CanonicalizeVoteTest, RequiresAssignedHit) {
  Hit hit;
  hit.id = HitId("h");
  hit.pair = Pair("a", "b");
  hit.presentation = Presentation::kBA;
  EXPECT_THROW(CanonicalizeVote(hit, Choice::kFirst), Error);
  hit.status = HitStatus::kAssigned;
  hit.worker = WorkerId("w");
  const Vote v = CanonicalizeVote(hit, Choice::kFirst, 17);
  EXPECT_EQ(v.canonical_score, -1);
  EXPECT_EQ(v.worker_id.str(), "w");
  EXPECT_EQ(v.timestamp_ms, 17);
  EXPECT_EQ(v.pair, hit.pair);
}

// Reference aggregation written from the definitions.
struct Expected {
  int sum = 0;
  int modal = 0;
  Outcome outcome = Outcome::kDropped;
};

Expected Reference(const std::array<int, 6>& s) {
  Expected e;
  int counts[3] = {0, 0, 0};
  for (int v : s) {
    e.sum += v;
    ++counts[v + 1];
  }
  e.modal = std::max({counts[0], counts[1], counts[2]});
  e.outcome = e.sum > 0 ? Outcome::kAWins
                        : (e.sum < 0 ? Outcome::kBWins : Outcome::kDropped);
  return e;
}

TEST(AggregateScoresTest, ExhaustiveOracle) {
  const PairKey pair = Pair("a", "b");
  int checked = 0;
  for (int code = 0; code < 729; ++code) {
    std::array<int, 6> s{};
    int c = code;
    for (int& v : s) {
      v = c % 3 - 1;
      c /= 3;
    }
    const auto got = AggregateScores(PolicyId("p"), pair, s);
    const Expected want = Reference(s);
    EXPECT_EQ(got.scores, s);
    EXPECT_EQ(got.sum_score, want.sum);
    EXPECT_EQ(got.modal_count, want.modal);
    EXPECT_EQ(got.outcome, want.outcome);
    EXPECT_DOUBLE_EQ(got.percent_agreement(), want.modal / 6.0);
    EXPECT_GE(got.modal_count, 2);
    ++checked;
  }
  EXPECT_EQ(checked, 729);
}

TEST(AggregateScoresTest, WorkedExamples) {
  const PairKey pair = Pair("a", "b");
  const auto c = AggregateScores(PolicyId("p"), pair, {1, 1, 1, 1, -1, 0});
  EXPECT_EQ(c.sum_score, 3);
  EXPECT_EQ(c.outcome, Outcome::kAWins);
  EXPECT_NEAR(c.percent_agreement(), 0.67, 0.005);
  const auto d = AggregateScores(PolicyId("p"), pair, {1, -1, 1, -1, 0, 0});
  EXPECT_EQ(d.sum_score, 0);
  EXPECT_EQ(d.outcome, Outcome::kDropped);
  const auto u = AggregateScores(PolicyId("p"), pair, {-1, -1, -1, -1, -1, -1});
  EXPECT_EQ(u.sum_score, -6);
  EXPECT_EQ(u.outcome, Outcome::kBWins);
  EXPECT_DOUBLE_EQ(u.percent_agreement(), 1.0);
  EXPECT_THROW(AggregateScores(PolicyId("p"), pair, {2, 0, 0, 0, 0, 0}), Error);
}

std::vector<Vote> VotesFor(const PairKey& pair,
                           const std::array<Presentation, 6>& presentations,
                           const std::array<Choice, 6>& choices) {
  std::vector<Vote> votes;
  for (int i = 0; i < 6; ++i) {
    Hit h;
    h.id = MakeHitId(pair, i + 1);
    h.pair = pair;
    h.slot = i + 1;
    h.presentation = presentations[i];
    h.status = HitStatus::kAssigned;
    h.worker = WorkerId("w" + std::to_string(i));
    votes.push_back(CanonicalizeVote(h, choices[i]));
  }
  return votes;
}

Choice Flip(Choice c) {
  return c == Choice::kFirst ? Choice::kSecond
                             : (c == Choice::kSecond ? Choice::kFirst : c);
}

Presentation Flip(Presentation p) {
  return p == Presentation::kAB ? Presentation::kBA : Presentation::kAB;
}

TEST(AggregatePairTest, PresentationSwapInvariance) {
  const PairKey pair = Pair("a", "b");
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    std::array<Presentation, 6> pres{};
    std::array<Choice, 6> choice{};
    std::array<Presentation, 6> pres_flipped{};
    std::array<Choice, 6> choice_flipped{};
    for (int i = 0; i < 6; ++i) {
      pres[i] = rng.Bernoulli(0.5) ? Presentation::kAB : Presentation::kBA;
      choice[i] = kChoices[rng.UniformIndex(3)];
      pres_flipped[i] = Flip(pres[i]);
      choice_flipped[i] = Flip(choice[i]);
    }
    const auto x = AggregatePair(PolicyId("p"), VotesFor(pair, pres, choice));
    const auto y = AggregatePair(PolicyId("p"),
                                 VotesFor(pair, pres_flipped, choice_flipped));
    EXPECT_EQ(x.scores, y.scores);
    EXPECT_EQ(x.sum_score, y.sum_score);
    EXPECT_EQ(x.modal_count, y.modal_count);
    EXPECT_EQ(x.outcome, y.outcome);
  }
}

TEST(AggregatePairTest, RejectsIncompleteOrDuplicateWorkers) {
  const PairKey pair = Pair("a", "b");
  std::array<Presentation, 6> pres{};
  pres.fill(Presentation::kAB);
  std::array<Choice, 6> choice{};
  choice.fill(Choice::kFirst);
  auto votes = VotesFor(pair, pres, choice);
  auto expect_incomplete = [](std::span<const Vote> v) {
    try {
      AggregatePair(PolicyId("p"), v);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kIncompleteComparison);
    }
  };
  expect_incomplete(std::span<const Vote>(votes).first(5));
  auto dup = votes;
  dup[5].worker_id = dup[0].worker_id;
  expect_incomplete(dup);
  auto seven = votes;
  seven.push_back(votes[0]);
  seven.back().worker_id = WorkerId("w9");
  expect_incomplete(seven);
  auto other = votes;
  other[2].pair = Pair("a", "c");
  EXPECT_THROW(AggregatePair(PolicyId("p"), other), Error);
}

TEST(ExtractWinTuplesTest, SkipsDropped) {
  const auto win = AggregateScores(PolicyId("p"), Pair("s1", "s2"), {1, 1, 1, 0, 0, 0});
  const auto loss = AggregateScores(PolicyId("p"), Pair("s1", "s3"), {-1, -1, 0, 0, 0, 0});
  const auto drop = AggregateScores(PolicyId("p"), Pair("s2", "s3"), {1, -1, 0, 0, 0, 0});
  const std::vector<AggregatedComparison> all = {win, drop, loss};
  const auto tuples = ExtractWinTuples(all);
  ASSERT_EQ(tuples.size(), 2u);
  EXPECT_EQ(tuples[0], (WinTuple{StatementId("s1"), StatementId("s2")}));
  EXPECT_EQ(tuples[1], (WinTuple{StatementId("s3"), StatementId("s1")}));
  EXPECT_TRUE(ExtractWinTuples(std::vector<AggregatedComparison>{drop}).empty());
}

TEST(SummarizeAgreementTest, FractionsAndErrors) {
  const auto full = AggregateScores(PolicyId("p"), Pair("a", "b"), {1, 1, 1, 1, 1, 1});
  const auto single = SummarizeAgreement(std::vector<AggregatedComparison>{full});
  EXPECT_DOUBLE_EQ(single.mean, 1.0);
  for (double f : single.fraction_at_least) EXPECT_DOUBLE_EQ(f, 1.0);

  const std::vector<AggregatedComparison> mixed = {
      full,
      AggregateScores(PolicyId("p"), Pair("a", "c"), {1, 1, 1, 1, -1, 0}),
      AggregateScores(PolicyId("p"), Pair("b", "c"), {1, 1, -1, -1, 0, 0})};
  const auto s = SummarizeAgreement(mixed);
  EXPECT_EQ(s.count, 3u);
  EXPECT_NEAR(s.mean, (6 + 4 + 2) / 18.0, 1e-12);
  EXPECT_DOUBLE_EQ(s.fraction_at_least[0], 2.0 / 3.0);  // >= 3
  EXPECT_DOUBLE_EQ(s.fraction_at_least[1], 2.0 / 3.0);  // >= 4
  EXPECT_DOUBLE_EQ(s.fraction_at_least[2], 1.0 / 3.0);  // >= 5
  EXPECT_DOUBLE_EQ(s.fraction_at_least[3], 1.0 / 3.0);  // >= 6
  EXPECT_DOUBLE_EQ(s.quartiles.median, 4.0 / 6.0);
  EXPECT_THROW(SummarizeAgreement(std::vector<AggregatedComparison>{}), Error);

  const auto sorted = SortedByAgreement(mixed);
  EXPECT_EQ(sorted.front().modal_count, 2);
  EXPECT_EQ(sorted.back().modal_count, 6);
}

TEST(ComparisonsCsvTest, RoundTripAndValidation) {
  const std::vector<AggregatedComparison> rows = {
      AggregateScores(PolicyId("p"), Pair("p#0000", "p#0001"), {1, 1, 1, 1, -1, 0}),
      AggregateScores(PolicyId("p"), Pair("p#0000", "p#0002"), {1, -1, 0, 0, 1, -1})};
  std::ostringstream out;
  WriteComparisonsCsv(out, rows);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')),
            "policy_id,statement_a,statement_b,score_1,score_2,score_3,"
            "score_4,score_5,score_6,sum,agreement,outcome");
  std::istringstream in(out.str());
  const auto back = ReadComparisonsCsv(in);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].policy_id, rows[i].policy_id);
    EXPECT_EQ(back[i].pair, rows[i].pair);
    EXPECT_EQ(back[i].scores, rows[i].scores);
    EXPECT_EQ(back[i].outcome, rows[i].outcome);
  }
  std::string tampered = out.str();
  tampered.replace(tampered.find(",3,"), 3, ",2,");
  std::istringstream bad(tampered);
  EXPECT_THROW(ReadComparisonsCsv(bad), Error);

  std::ostringstream tuples;
  WriteWinTuplesCsv(tuples, rows);
  EXPECT_EQ(tuples.str(), "policy_id,winner,loser\np,p#0000,p#0001\n");
}

}  // namespace
}  // namespace tcrank
