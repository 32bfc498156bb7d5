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

#include "tcrank/service.h"

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "support/synthetic.h"
#include "tcrank/error.h"
#include "tcrank/event_log.h"
#include "tcrank/random.h"
#include "tcrank/sampling.h"

namespace tcrank {
namespace {

using ::testing::IsEmpty;
using testing::PlantedAbilities;
using testing::PlantedOrder;
using testing::StatementIds;
using testing::SyntheticPolicyText;

constexpr std::int64_t kMinute = 60 * 1000;

ServiceOptions Options(std::uint64_t seed, std::filesystem::path log = {}) {
  ServiceOptions o;
  o.seed = seed;
  o.log_path = std::move(log);
  return o;
}

class FakeClock {
 public:
  Clock AsClock() {
    return [this] { return now_.load(); };
  }
  void Advance(std::int64_t ms) { now_ += ms; }

 private:
  std::atomic<std::int64_t> now_{1'700'000'000'000};
};

template <typename F>
ErrorCode CodeOf(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidState;
}

std::unique_ptr<Service> MakeService(FakeClock& clock, std::size_t statements,
                                     double fraction = 1.0,
                                     std::uint64_t seed = 1) {
  auto s = std::make_unique<Service>(Options(seed), clock.AsClock());
  s->IngestPolicy(PolicyId("p"), "https://example.com/terms",
                  SyntheticPolicyText(statements));
  s->GenerateHits(PolicyId("p"), fraction, seed);
  return s;
}

void RegisterAll(Service& s, std::size_t n, const std::string& prefix = "w") {
  for (std::size_t i = 0; i < n; ++i) {
    s.RegisterWorker(WorkerId(prefix + std::to_string(i)), true);
  }
}

// Replays the event log by hand and checks the assignment rules against it:
// an assigned hit was open, its worker had not voted on the pair and held no
// other slot of it, and every vote names the worker holding the hit.
std::vector<std::string> CheckLogDiscipline(const Service& s, const PolicyId& p) {
  using nlohmann::json;
  std::map<std::string, PairKey> pair_of;
  for (const auto& h : s.Hits(p)) pair_of[h.id.str()] = h.pair;
  std::map<std::string, std::string> holder;  // hit -> worker
  std::set<std::string> completed;
  std::map<std::string, std::set<PairKey>> voted;
  std::map<PairKey, std::set<std::string>> voters;
  std::vector<std::string> problems;
  for (const auto& e : s.Events()) {
    if (e.kind != EventKind::kHitAssigned && e.kind != EventKind::kVoteRecorded &&
        e.kind != EventKind::kAssignmentExpired) {
      continue;
    }
    const json payload = json::parse(e.payload);
    const std::string hit = payload.at("hit_id");
    const std::string worker = payload.at("worker_id");
    const PairKey pair = pair_of.at(hit);
    switch (e.kind) {
      case EventKind::kHitAssigned: {
        if (holder.contains(hit) || completed.contains(hit)) {
          problems.push_back("assigned a busy hit " + hit);
        }
        if (voted[worker].contains(pair)) {
          problems.push_back(worker + " got a pair it already voted on");
        }
        for (const auto& [h, w] : holder) {
          if (w == worker && pair_of.at(h) == pair) {
            problems.push_back(worker + " holds two slots of one pair");
          }
        }
        holder[hit] = worker;
        break;
      }
      case EventKind::kAssignmentExpired:
        if (holder[hit] != worker) problems.push_back("expired a foreign lease");
        holder.erase(hit);
        break;
      case EventKind::kVoteRecorded:
        if (holder[hit] != worker) problems.push_back("vote from a non-holder");
        holder.erase(hit);
        completed.insert(hit);
        voted[worker].insert(pair);
        if (!voters[pair].insert(worker).second) {
          problems.push_back("two votes by one worker on a pair");
        }
        break;
      default:
        break;
    }
  }
  for (const auto& [pair, ws] : voters) {
    if (ws.size() > 6) problems.push_back("more than six voters on a pair");
  }
  return problems;
}

TEST(ServiceTest, FreshPolicyStatusCountsEverySlot) {
  FakeClock clock;
  auto s = MakeService(clock, 44);
  const PolicyStatus st = s->Status(PolicyId("p"));
  EXPECT_EQ(st.statements, 44u);
  EXPECT_EQ(st.pairs, 946u);
  EXPECT_EQ(st.total_hits, 5676u);
  EXPECT_EQ(st.open, 5676u);
  EXPECT_EQ(st.completed + st.assigned, 0u);
  EXPECT_THAT(s->AuditInvariants(), IsEmpty());
}

TEST(ServiceTest, IngestAndGenerateErrors) {
  FakeClock clock;
  auto s = MakeService(clock, 5);
  EXPECT_EQ(CodeOf([&] { s->IngestPolicy(PolicyId("p"), "", SyntheticPolicyText(5)); }),
            ErrorCode::kAlreadyExists);
  EXPECT_EQ(CodeOf([&] { s->GenerateHits(PolicyId("p"), 1.0, 1); }),
            ErrorCode::kAlreadyExists);
  EXPECT_EQ(CodeOf([&] { s->GenerateHits(PolicyId("q"), 1.0, 1); }),
            ErrorCode::kUnknownPolicy);
  EXPECT_EQ(CodeOf([&] { s->Status(PolicyId("q")); }), ErrorCode::kUnknownPolicy);
  const auto before = s->Events().size();
  s->IngestPolicy(PolicyId("q"), "", SyntheticPolicyText(10));
  EXPECT_EQ(CodeOf([&] { s->GenerateHits(PolicyId("q"), 0.05, 1); }),
            ErrorCode::kCoverageInfeasible);
  // The failed generation left no trace in the log.
  EXPECT_EQ(s->Events().size(), before + 1);
}

TEST(ServiceTest, WorkerErrors) {
  FakeClock clock;
  auto s = MakeService(clock, 3);
  EXPECT_EQ(CodeOf([&] { s->AssignTask(WorkerId("ghost")); }),
            ErrorCode::kUnknownWorker);
  s->RegisterWorker(WorkerId("u"), false);
  EXPECT_EQ(CodeOf([&] { s->AssignTask(WorkerId("u")); }),
            ErrorCode::kUnqualifiedWorker);
  s->RegisterWorker(WorkerId("u"), false);  // idempotent
  EXPECT_EQ(CodeOf([&] { s->RegisterWorker(WorkerId("u"), true); }),
            ErrorCode::kAlreadyExists);
  s->RegisterWorker(WorkerId("w"), true);
  EXPECT_EQ(CodeOf([&] { s->SubmitVote(WorkerId("w"), HitId("nope"), Choice::kFirst); }),
            ErrorCode::kUnknownHit);
  EXPECT_EQ(CodeOf([&] { s->SubmitVote(WorkerId("ghost"), HitId("nope"), Choice::kFirst); }),
            ErrorCode::kUnknownWorker);
}

TEST(ServiceTest, OnePairGetsBothPresentationsFromSixWorkers) {
  FakeClock clock;
  auto s = std::make_unique<Service>(Options(3), clock.AsClock());
  s->IngestPolicy(PolicyId("p"), "", SyntheticPolicyText(2));
  ASSERT_EQ(s->GenerateHits(PolicyId("p"), 1.0, 3), 6u);
  RegisterAll(*s, 7);
  std::map<Presentation, int> presentations;
  std::set<WorkerId> workers;
  for (int i = 0; i < 6; ++i) {
    const WorkerId w("w" + std::to_string(i));
    const TaskAssignment t = s->AssignTask(w);
    // A worker cannot be handed the same pair twice.
    EXPECT_EQ(CodeOf([&] { s->AssignTask(w); }), ErrorCode::kNoTaskAvailable);
    ++presentations[t.presentation];
    workers.insert(w);
    EXPECT_EQ(t.expires_at_ms, clock.AsClock()() + 10 * kMinute);
    EXPECT_NE(t.statement_1, t.statement_2);
    EXPECT_FALSE(t.statement_1_text.empty());
    s->SubmitVote(w, t.hit_id, Choice::kFirst);
  }
  EXPECT_EQ(presentations[Presentation::kAB], 3);
  EXPECT_EQ(presentations[Presentation::kBA], 3);
  EXPECT_EQ(CodeOf([&] { s->AssignTask(WorkerId("w6")); }), ErrorCode::kNoTaskAvailable);

  const auto comparisons = s->Comparisons(PolicyId("p"));
  ASSERT_EQ(comparisons.size(), 1u);
  // "first" three times in each presentation cancels out.
  EXPECT_EQ(comparisons[0].sum_score, 0);
  EXPECT_EQ(comparisons[0].outcome, Outcome::kDropped);
  EXPECT_EQ(s->Status(PolicyId("p")).pairs_fully_voted, 1u);
  EXPECT_THAT(s->AuditInvariants(), IsEmpty());
}

TEST(ServiceTest, ExpiredLeaseIsStaleAndReopens) {
  FakeClock clock;
  auto s = MakeService(clock, 3);
  RegisterAll(*s, 2);
  const TaskAssignment t = s->AssignTask(WorkerId("w0"));
  EXPECT_EQ(s->Status(PolicyId("p")).assigned, 1u);
  clock.Advance(10 * kMinute);
  EXPECT_EQ(CodeOf([&] { s->SubmitVote(WorkerId("w0"), t.hit_id, Choice::kFirst); }),
            ErrorCode::kStaleAssignment);
  const PolicyStatus st = s->Status(PolicyId("p"));
  EXPECT_EQ(st.assigned, 0u);
  EXPECT_EQ(st.open, st.total_hits);
  // Someone else's hit is stale too.
  const TaskAssignment u = s->AssignTask(WorkerId("w1"));
  EXPECT_EQ(CodeOf([&] { s->SubmitVote(WorkerId("w0"), u.hit_id, Choice::kFirst); }),
            ErrorCode::kStaleAssignment);
  EXPECT_THAT(s->AuditInvariants(), IsEmpty());
}

TEST(ServiceTest, ExpireLeasesSweepsOnlyPastLeases) {
  FakeClock clock;
  auto s = MakeService(clock, 4);
  RegisterAll(*s, 3);
  s->AssignTask(WorkerId("w0"));
  clock.Advance(5 * kMinute);
  s->AssignTask(WorkerId("w1"));
  EXPECT_EQ(s->ExpireLeases(), 0u);
  clock.Advance(5 * kMinute);
  EXPECT_EQ(s->ExpireLeases(), 1u);
  clock.Advance(5 * kMinute);
  EXPECT_EQ(s->ExpireLeases(), 1u);
  EXPECT_EQ(s->Status(PolicyId("p")).assigned, 0u);
}

TEST(ServiceTest, RetriesAreIdempotentAndConflictsRejected) {
  FakeClock clock;
  auto s = MakeService(clock, 3);
  RegisterAll(*s, 1);
  const TaskAssignment t = s->AssignTask(WorkerId("w0"));
  const VoteAck first = s->SubmitVote(WorkerId("w0"), t.hit_id, Choice::kSecond);
  EXPECT_FALSE(first.duplicate);
  const auto events = s->Events().size();
  clock.Advance(60 * kMinute);  // retries are accepted after the lease too
  const VoteAck again = s->SubmitVote(WorkerId("w0"), t.hit_id, Choice::kSecond);
  EXPECT_TRUE(again.duplicate);
  EXPECT_EQ(again.sequence, first.sequence);
  EXPECT_EQ(again.canonical_score, first.canonical_score);
  EXPECT_EQ(s->Events().size(), events);
  EXPECT_EQ(CodeOf([&] { s->SubmitVote(WorkerId("w0"), t.hit_id, Choice::kEqual); }),
            ErrorCode::kConflictingResubmission);
  EXPECT_EQ(s->Votes(PolicyId("p")).size(), 1u);
}

TEST(ServiceTest, CanonicalScoreFollowsPresentation) {
  FakeClock clock;
  auto s = MakeService(clock, 2);
  RegisterAll(*s, 6);
  for (int i = 0; i < 6; ++i) {
    const WorkerId w("w" + std::to_string(i));
    const TaskAssignment t = s->AssignTask(w);
    // Always favour the statement with the smaller id.
    const bool smaller_first = t.statement_1 < t.statement_2;
    const VoteAck ack =
        s->SubmitVote(w, t.hit_id, smaller_first ? Choice::kFirst : Choice::kSecond);
    EXPECT_EQ(ack.canonical_score, ack.pair.a < ack.pair.b ? 1 : -1);
  }
  const auto c = s->Comparisons(PolicyId("p"));
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].sum_score, 6);
  EXPECT_EQ(c[0].outcome, Outcome::kAWins);
  EXPECT_EQ(c[0].modal_count, 6);
}

TEST(ServiceTest, NoiselessSimulationReproducesPlantedOrder) {
  FakeClock clock;
  auto s = MakeService(clock, 12);
  const auto ids = StatementIds(s->Policy(PolicyId("p")));
  const auto abilities = PlantedAbilities(ids, 3.0, 7);
  const SimulationReport r =
      s->SimulateWorkers(PolicyId("p"), abilities, {.workers = 8, .seed = 9});
  EXPECT_EQ(r.votes, 66u * 6);
  EXPECT_EQ(r.votes_per_worker.size(), 8u);
  for (const auto& c : s->Comparisons(PolicyId("p"))) {
    const bool a_stronger = abilities.at(c.pair.a) > abilities.at(c.pair.b);
    EXPECT_EQ(c.outcome, a_stronger ? Outcome::kAWins : Outcome::kBWins);
    EXPECT_EQ(c.modal_count, 6);
  }
  const Ranking ranking = RankFromModel(s->FitModel(PolicyId("p")));
  EXPECT_EQ(ranking.ordered, PlantedOrder(abilities));
  EXPECT_THAT(s->AuditInvariants(), IsEmpty());
  EXPECT_THAT(CheckLogDiscipline(*s, PolicyId("p")), IsEmpty());
}

TEST(ServiceTest, HalfNoiseIsAFairCoin) {
  // Two statements, noise 0.5: each vote favours the planted winner with
  // probability 1/2 independently of the planted gap.
  int favoured = 0;
  constexpr int kTrials = 100;
  for (int seed = 0; seed < kTrials; ++seed) {
    FakeClock clock;
    auto s = MakeService(clock, 2, 1.0, seed);
    const auto ids = StatementIds(s->Policy(PolicyId("p")));
    const std::map<StatementId, double> abilities{{ids[0], 5.0}, {ids[1], -5.0}};
    s->SimulateWorkers(PolicyId("p"), abilities,
                       {.noise = 0.5, .seed = static_cast<std::uint64_t>(seed)});
    for (const auto& v : s->Votes(PolicyId("p"))) favoured += v.canonical_score > 0;
  }
  // 600 Bernoulli(1/2) draws; sd = sqrt(150) ~ 12.2, allow 4 sd.
  EXPECT_NEAR(favoured, 300, 49);
}

TEST(ServiceTest, SimulationValidatesItsInput) {
  FakeClock clock;
  auto s = MakeService(clock, 4);
  const auto ids = StatementIds(s->Policy(PolicyId("p")));
  auto abilities = PlantedAbilities(ids, 1.0, 1);
  EXPECT_EQ(CodeOf([&] { s->SimulateWorkers(PolicyId("p"), abilities, {.workers = 5}); }),
            ErrorCode::kInsufficientWorkers);
  EXPECT_EQ(CodeOf([&] {
              s->SimulateWorkers(PolicyId("p"), abilities, {.noise = 1.5});
            }),
            ErrorCode::kInvalidInput);
  abilities.erase(ids[0]);
  EXPECT_EQ(CodeOf([&] { s->SimulateWorkers(PolicyId("p"), abilities, {}); }),
            ErrorCode::kUnknownStatement);
}

TEST(ServiceTest, ConcurrentSoakKeepsInvariants) {
  FakeClock clock;
  auto s = MakeService(clock, 10);
  constexpr int kThreads = 4;
  constexpr int kRequestsPerThread = 250;
  RegisterAll(*s, 12);
  std::atomic<int> requests{0};
  std::atomic<int> audits_failed{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < kThreads; ++t) {
    threads.emplace_back([&, t] {
      Rng rng(DeriveSeed(42, t));
      for (int i = 0; i < kRequestsPerThread; ++i) {
        const WorkerId w("w" + std::to_string(rng.UniformIndex(12)));
        ++requests;
        try {
          const TaskAssignment task = s->AssignTask(w);
          if (rng.Bernoulli(0.1)) clock.Advance(11 * kMinute);
          if (rng.Bernoulli(0.15)) continue;  // abandoned
          const auto choice = static_cast<Choice>(rng.UniformIndex(3));
          s->SubmitVote(w, task.hit_id, choice);
          if (rng.Bernoulli(0.2)) s->SubmitVote(w, task.hit_id, choice);
        } catch (const Error& e) {
          const ErrorCode c = e.code();
          if (c != ErrorCode::kNoTaskAvailable && c != ErrorCode::kStaleAssignment) {
            ADD_FAILURE() << e.what();
          }
        }
        if (i % 50 == 0 && !s->AuditInvariants().empty()) ++audits_failed;
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(requests.load(), kThreads * kRequestsPerThread);
  EXPECT_EQ(audits_failed.load(), 0);
  EXPECT_THAT(s->AuditInvariants(), IsEmpty());
  EXPECT_THAT(CheckLogDiscipline(*s, PolicyId("p")), IsEmpty());
  const PolicyStatus st = s->Status(PolicyId("p"));
  EXPECT_EQ(st.completed + st.open + st.assigned, st.total_hits);
  EXPECT_EQ(st.completed, s->Votes(PolicyId("p")).size());
  EXPECT_GT(st.completed, 0u);
}

TEST(ServiceTest, EveryLogPrefixReplaysToTheSameState) {
  FakeClock clock;
  auto s = MakeService(clock, 6);
  RegisterAll(*s, 8);
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const WorkerId w("w" + std::to_string(rng.UniformIndex(8)));
    try {
      const TaskAssignment t = s->AssignTask(w);
      if (rng.Bernoulli(0.1)) clock.Advance(11 * kMinute);
      if (rng.Bernoulli(0.8)) s->SubmitVote(w, t.hit_id, Choice::kFirst);
    } catch (const Error& e) {
      ASSERT_TRUE(e.code() == ErrorCode::kNoTaskAvailable ||
                  e.code() == ErrorCode::kStaleAssignment)
          << e.what();
    }
  }
  const auto events = s->Events();
  const PolicyId p("p");
  // Reference snapshots, built incrementally while walking the log.
  for (std::size_t n = 2; n <= events.size(); ++n) {
    const std::span<const EventRecord> prefix(events.data(), n);
    auto replay = Service::FromEvents(prefix, Options(1), clock.AsClock());
    const PolicyStatus st = replay->Status(p);
    std::size_t completed = 0;
    for (const auto& e : prefix) completed += e.kind == EventKind::kVoteRecorded;
    ASSERT_EQ(st.completed, completed) << "prefix " << n;
    ASSERT_EQ(st.completed + st.open + st.assigned, st.total_hits);
    ASSERT_THAT(replay->AuditInvariants(), IsEmpty()) << "prefix " << n;
  }
  auto full = Service::FromEvents(events, Options(1), clock.AsClock());
  EXPECT_EQ(full->Status(p), s->Status(p));
  EXPECT_EQ(full->Events().size(), events.size());
}

TEST(ServiceTest, ReplayedServiceMakesTheSameNextAssignment) {
  FakeClock clock;
  auto s = MakeService(clock, 8);
  RegisterAll(*s, 3);
  for (int i = 0; i < 3; ++i) {
    const WorkerId w("w" + std::to_string(i));
    s->SubmitVote(w, s->AssignTask(w).hit_id, Choice::kSecond);
  }
  auto replay = Service::FromEvents(s->Events(), Options(1), clock.AsClock());
  const TaskAssignment a = s->AssignTask(WorkerId("w0"));
  const TaskAssignment b = replay->AssignTask(WorkerId("w0"));
  EXPECT_EQ(a.hit_id, b.hit_id);
  EXPECT_EQ(a.presentation, b.presentation);
}

class ServiceFileTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("tcrank_service_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

TEST_F(ServiceFileTest, ReopeningTheLogRestoresState) {
  FakeClock clock;
  const auto log = dir_ / "events.jsonl";
  PolicyStatus before;
  {
    Service s(Options(2, log), clock.AsClock());
    s.IngestPolicy(PolicyId("p"), "u", SyntheticPolicyText(5));
    s.GenerateHits(PolicyId("p"), 1.0, 2);
    RegisterAll(s, 4);
    for (int i = 0; i < 4; ++i) {
      const WorkerId w("w" + std::to_string(i));
      s.SubmitVote(w, s.AssignTask(w).hit_id, Choice::kEqual);
    }
    s.AssignTask(WorkerId("w0"));
    before = s.Status(PolicyId("p"));
  }
  Service reopened(Options(2, log), clock.AsClock());
  EXPECT_EQ(reopened.Status(PolicyId("p")), before);
  EXPECT_EQ(reopened.Votes(PolicyId("p")).size(), 4u);
  EXPECT_THAT(reopened.AuditInvariants(), IsEmpty());
  // New events continue the sequence.
  reopened.RegisterWorker(WorkerId("late"), true);
  const auto events = ReadEventFile(log);
  for (std::size_t i = 0; i < events.size(); ++i) EXPECT_EQ(events[i].sequence, i + 1);
}

TEST_F(ServiceFileTest, TruncatedFinalLineIsDropped) {
  FakeClock clock;
  const auto log = dir_ / "events.jsonl";
  std::size_t complete = 0;
  {
    Service s(Options(2, log), clock.AsClock());
    s.IngestPolicy(PolicyId("p"), "u", SyntheticPolicyText(4));
    s.GenerateHits(PolicyId("p"), 1.0, 2);
    RegisterAll(s, 2);
    s.SubmitVote(WorkerId("w0"), s.AssignTask(WorkerId("w0")).hit_id, Choice::kFirst);
    complete = s.Events().size();
  }
  // Simulate a crash in the middle of writing the next record.
  {
    std::ofstream out(log, std::ios::app);
    out << R"({"seq":)" << complete + 1 << R"(,"kind":"vote_recor)";
  }
  Service reopened(Options(2, log), clock.AsClock());
  EXPECT_EQ(reopened.Events().size(), complete);
  EXPECT_EQ(reopened.Status(PolicyId("p")).completed, 1u);
  reopened.SubmitVote(WorkerId("w1"), reopened.AssignTask(WorkerId("w1")).hit_id,
                      Choice::kSecond);
  EXPECT_EQ(ReadEventFile(log).size(), complete + 2);
}

}  // namespace
}  // namespace tcrank
