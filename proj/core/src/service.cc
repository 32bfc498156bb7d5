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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "tcrank/error.h"
#include "tcrank/random.h"

namespace tcrank {
namespace {

using nlohmann::json;

std::string_view PresentationOf(const Hit& hit, bool first) {
  const bool ab = hit.presentation == Presentation::kAB;
  return (ab == first) ? hit.pair.a.str() : hit.pair.b.str();
}

}  // namespace

std::int64_t SystemClockMs() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

Service::Service(ServiceOptions options, Clock clock)
    : Service(std::move(options), std::move(clock), true) {}

Service::Service(ServiceOptions options, Clock clock, bool open_log)
    : options_(std::move(options)), clock_(std::move(clock)) {
  if (!open_log || options_.log_path.empty()) return;
  auto events = ReadEventFile(options_.log_path);
  for (const auto& e : events) Apply(e);
  log_.Open(options_.log_path);
  log_.Restore(std::move(events));
}

std::unique_ptr<Service> Service::FromEvents(std::span<const EventRecord> events,
                                             ServiceOptions options,
                                             Clock clock) {
  options.log_path.clear();
  std::unique_ptr<Service> s(new Service(std::move(options), std::move(clock), false));
  std::vector<EventRecord> copy(events.begin(), events.end());
  for (const auto& e : copy) s->Apply(e);
  s->log_.Restore(std::move(copy));
  return s;
}

const EventRecord& Service::Emit(EventKind kind, std::int64_t now,
                                 std::string payload) {
  const EventRecord& record = log_.Append(kind, now, std::move(payload));
  Apply(record);
  return record;
}

void Service::Apply(const EventRecord& event) {
  const json p = json::parse(event.payload);
  switch (event.kind) {
    case EventKind::kPolicyIngested: {
      PolicyState state;
      state.doc = SegmentPolicy(PolicyId(p.at("policy_id").get<std::string>()),
                                p.at("source_url").get<std::string>(),
                                p.at("raw_text").get<std::string>());
      for (const auto& s : state.doc.statements) {
        state.statement_index[s.id] = s.index;
      }
      const PolicyId id = state.doc.policy_id;
      policies_[id] = std::move(state);
      break;
    }
    case EventKind::kHitsGenerated: {
      auto& state = policies_.at(PolicyId(p.at("policy_id").get<std::string>()));
      const auto pairs = EnumeratePairs(state.doc);
      state.hits = tcrank::GenerateHits(pairs, p.at("fraction").get<double>(),
                                        p.at("seed").get<std::uint64_t>());
      state.hits_generated = true;
      for (std::size_t i = 0; i < state.hits.size(); ++i) {
        state.hits_by_pair[state.hits[i].pair].push_back(i);
        hit_refs_[state.hits[i].id] = {state.doc.policy_id, i};
      }
      break;
    }
    case EventKind::kWorkerRegistered:
      workers_[WorkerId(p.at("worker_id").get<std::string>())].qualified =
          p.at("qualified").get<bool>();
      break;
    case EventKind::kHitAssigned: {
      const HitId hit_id(p.at("hit_id").get<std::string>());
      const WorkerId worker_id(p.at("worker_id").get<std::string>());
      const auto expires = p.at("expires_at_ms").get<std::int64_t>();
      Hit& hit = HitAt(hit_refs_.at(hit_id));
      hit.status = HitStatus::kAssigned;
      hit.worker = worker_id;
      workers_.at(worker_id).held[hit_id] = expires;
      lease_expiry_[hit_id] = expires;
      break;
    }
    case EventKind::kAssignmentExpired: {
      const HitId hit_id(p.at("hit_id").get<std::string>());
      const WorkerId worker_id(p.at("worker_id").get<std::string>());
      Hit& hit = HitAt(hit_refs_.at(hit_id));
      hit.status = HitStatus::kOpen;
      hit.worker.reset();
      workers_.at(worker_id).held.erase(hit_id);
      lease_expiry_.erase(hit_id);
      break;
    }
    case EventKind::kVoteRecorded: {
      const HitId hit_id(p.at("hit_id").get<std::string>());
      const WorkerId worker_id(p.at("worker_id").get<std::string>());
      const Choice choice = ParseChoice(p.at("choice").get<std::string>());
      const HitRef& ref = hit_refs_.at(hit_id);
      Hit& hit = HitAt(ref);
      const Vote vote = CanonicalizeVote(hit, choice, event.timestamp_ms);
      hit.status = HitStatus::kCompleted;
      WorkerState& worker = workers_.at(worker_id);
      worker.held.erase(hit_id);
      worker.completed_pairs.insert(hit.pair);
      worker.votes[hit_id] = vote;
      worker.vote_sequence[hit_id] = event.sequence;
      lease_expiry_.erase(hit_id);
      auto& state = policies_.at(ref.policy_id);
      state.vote_of_hit[hit_id] = state.votes.size();
      state.votes.push_back(vote);
      break;
    }
  }
}

const Service::PolicyState& Service::PolicyOrThrow(const PolicyId& id) const {
  const auto it = policies_.find(id);
  if (it == policies_.end()) {
    throw Error(ErrorCode::kUnknownPolicy, "unknown policy " + id.str());
  }
  return it->second;
}

Service::WorkerState& Service::WorkerOrThrow(const WorkerId& id) {
  const auto it = workers_.find(id);
  if (it == workers_.end()) {
    throw Error(ErrorCode::kUnknownWorker, "unknown worker " + id.str());
  }
  return it->second;
}

Hit& Service::HitAt(const HitRef& ref) {
  return policies_.at(ref.policy_id).hits[ref.index];
}

const Hit& Service::HitAt(const HitRef& ref) const {
  return policies_.at(ref.policy_id).hits[ref.index];
}

PolicyDocument Service::IngestPolicy(const PolicyId& policy_id,
                                     const std::string& source_url,
                                     const std::string& raw_text) {
  std::lock_guard lock(mu_);
  if (policy_id.empty()) throw Error(ErrorCode::kInvalidInput, "empty policy id");
  if (policies_.contains(policy_id)) {
    throw Error(ErrorCode::kAlreadyExists, "policy " + policy_id.str() + " exists");
  }
  // Validates the text before anything is logged.
  SegmentPolicy(policy_id, source_url, raw_text);
  Emit(EventKind::kPolicyIngested, clock_(),
       json{{"policy_id", policy_id.str()},
            {"source_url", source_url},
            {"raw_text", raw_text}}
           .dump());
  return policies_.at(policy_id).doc;
}

std::size_t Service::GenerateHits(const PolicyId& policy_id, double fraction,
                                  std::uint64_t seed) {
  std::lock_guard lock(mu_);
  const PolicyState& state = PolicyOrThrow(policy_id);
  if (state.hits_generated) {
    throw Error(ErrorCode::kAlreadyExists,
                "Hits for " + policy_id.str() + " were already generated");
  }
  // Dry run so that invalid fractions or infeasible coverage fail unlogged.
  tcrank::GenerateHits(EnumeratePairs(state.doc), fraction, seed);
  Emit(EventKind::kHitsGenerated, clock_(),
       json{{"policy_id", policy_id.str()}, {"fraction", fraction}, {"seed", seed}}
           .dump());
  return policies_.at(policy_id).hits.size();
}

void Service::RegisterWorker(const WorkerId& worker_id, bool qualified) {
  std::lock_guard lock(mu_);
  if (worker_id.empty()) throw Error(ErrorCode::kInvalidInput, "empty worker id");
  if (const auto it = workers_.find(worker_id); it != workers_.end()) {
    if (it->second.qualified == qualified) return;
    throw Error(ErrorCode::kAlreadyExists,
                "worker " + worker_id.str() + " is registered with another flag");
  }
  Emit(EventKind::kWorkerRegistered, clock_(),
       json{{"worker_id", worker_id.str()}, {"qualified", qualified}}.dump());
}

void Service::ExpireLocked(std::int64_t now) {
  std::vector<std::pair<HitId, WorkerId>> expired;
  for (const auto& [hit_id, expiry] : lease_expiry_) {
    if (now >= expiry) expired.emplace_back(hit_id, *HitAt(hit_refs_.at(hit_id)).worker);
  }
  for (const auto& [hit_id, worker_id] : expired) {
    Emit(EventKind::kAssignmentExpired, now,
         json{{"hit_id", hit_id.str()}, {"worker_id", worker_id.str()}}.dump());
  }
}

std::size_t Service::ExpireLeases() {
  std::lock_guard lock(mu_);
  const std::size_t before = lease_expiry_.size();
  ExpireLocked(clock_());
  return before - lease_expiry_.size();
}

TaskAssignment Service::AssignTask(const WorkerId& worker_id) {
  std::lock_guard lock(mu_);
  const std::int64_t now = clock_();
  ExpireLocked(now);
  WorkerState& worker = WorkerOrThrow(worker_id);
  if (!worker.qualified) {
    throw Error(ErrorCode::kUnqualifiedWorker,
                "worker " + worker_id.str() + " is not qualified");
  }
  std::set<PairKey> held_pairs;
  for (const auto& [hit_id, expiry] : worker.held) {
    held_pairs.insert(HitAt(hit_refs_.at(hit_id)).pair);
  }
  std::vector<HitRef> eligible;
  for (const auto& [policy_id, state] : policies_) {
    for (std::size_t i = 0; i < state.hits.size(); ++i) {
      const Hit& h = state.hits[i];
      if (h.status == HitStatus::kOpen && !worker.completed_pairs.contains(h.pair) &&
          !held_pairs.contains(h.pair)) {
        eligible.push_back({policy_id, i});
      }
    }
  }
  if (eligible.empty()) {
    throw Error(ErrorCode::kNoTaskAvailable,
                "no task for worker " + worker_id.str());
  }
  Rng rng(DeriveSeed(options_.seed, log_.next_sequence()));
  const HitRef pick = eligible[rng.UniformIndex(eligible.size())];
  const PolicyState& state = policies_.at(pick.policy_id);
  const Hit& picked = state.hits[pick.index];

  // Balance the two presentations of the pair.
  std::array<int, 2> used{0, 0};
  for (std::size_t i : state.hits_by_pair.at(picked.pair)) {
    const Hit& h = state.hits[i];
    if (h.status != HitStatus::kOpen) ++used[h.presentation == Presentation::kBA];
  }
  Presentation want = picked.presentation;
  if (used[0] != used[1]) {
    want = used[0] < used[1] ? Presentation::kAB : Presentation::kBA;
  }
  std::size_t chosen = pick.index;
  for (std::size_t i : state.hits_by_pair.at(picked.pair)) {
    const Hit& h = state.hits[i];
    if (h.status == HitStatus::kOpen && h.presentation == want) {
      chosen = i;
      break;
    }
  }
  const Hit& hit = state.hits[chosen];
  const std::int64_t expires = now + options_.lease.count();
  Emit(EventKind::kHitAssigned, now,
       json{{"hit_id", hit.id.str()},
            {"worker_id", worker_id.str()},
            {"expires_at_ms", expires}}
           .dump());

  TaskAssignment task;
  task.hit_id = hit.id;
  task.policy_id = pick.policy_id;
  task.presentation = hit.presentation;
  task.statement_1 = StatementId(std::string(PresentationOf(hit, true)));
  task.statement_2 = StatementId(std::string(PresentationOf(hit, false)));
  task.statement_1_text =
      state.doc.statements[state.statement_index.at(task.statement_1)].text;
  task.statement_2_text =
      state.doc.statements[state.statement_index.at(task.statement_2)].text;
  task.source_url = state.doc.source_url;
  task.expires_at_ms = expires;
  return task;
}

VoteAck Service::SubmitVote(const WorkerId& worker_id, const HitId& hit_id,
                            Choice choice) {
  std::lock_guard lock(mu_);
  const std::int64_t now = clock_();
  WorkerState& worker = WorkerOrThrow(worker_id);
  const auto ref = hit_refs_.find(hit_id);
  if (ref == hit_refs_.end()) {
    throw Error(ErrorCode::kUnknownHit, "unknown hit " + hit_id.str());
  }
  if (const auto it = worker.votes.find(hit_id); it != worker.votes.end()) {
    if (it->second.choice != choice) {
      throw Error(ErrorCode::kConflictingResubmission,
                  "hit " + hit_id.str() + " was answered with " +
                      std::string(ChoiceName(it->second.choice)));
    }
    return {hit_id, it->second.pair, choice, it->second.canonical_score,
            worker.vote_sequence.at(hit_id), true};
  }
  const Hit& hit = HitAt(ref->second);
  if (hit.status != HitStatus::kAssigned || hit.worker != worker_id) {
    throw Error(ErrorCode::kStaleAssignment,
                "hit " + hit_id.str() + " is not assigned to " + worker_id.str());
  }
  if (now >= lease_expiry_.at(hit_id)) {
    Emit(EventKind::kAssignmentExpired, now,
         json{{"hit_id", hit_id.str()}, {"worker_id", worker_id.str()}}.dump());
    throw Error(ErrorCode::kStaleAssignment, "lease on " + hit_id.str() + " expired");
  }
  const EventRecord& e =
      Emit(EventKind::kVoteRecorded, now,
           json{{"hit_id", hit_id.str()},
                {"worker_id", worker_id.str()},
                {"choice", ChoiceName(choice)}}
               .dump());
  const Vote& vote = worker.votes.at(hit_id);
  return {hit_id, vote.pair, choice, vote.canonical_score, e.sequence, false};
}

PolicyStatus Service::Status(const PolicyId& policy_id) const {
  std::lock_guard lock(mu_);
  const PolicyState& state = PolicyOrThrow(policy_id);
  PolicyStatus s;
  s.policy_id = policy_id;
  s.statements = state.doc.statements.size();
  s.total_hits = state.hits.size();
  s.pairs = state.hits_by_pair.size();
  for (const auto& h : state.hits) {
    switch (h.status) {
      case HitStatus::kOpen: ++s.open; break;
      case HitStatus::kAssigned: ++s.assigned; break;
      case HitStatus::kCompleted: ++s.completed; break;
    }
  }
  for (const auto& [pair, idx] : state.hits_by_pair) {
    const bool done = std::all_of(idx.begin(), idx.end(), [&](std::size_t i) {
      return state.hits[i].status == HitStatus::kCompleted;
    });
    s.pairs_fully_voted += done;
  }
  return s;
}

std::vector<Hit> Service::Hits(const PolicyId& policy_id) const {
  std::lock_guard lock(mu_);
  return PolicyOrThrow(policy_id).hits;
}

std::vector<Vote> Service::Votes(const PolicyId& policy_id) const {
  std::lock_guard lock(mu_);
  return PolicyOrThrow(policy_id).votes;
}

std::vector<AggregatedComparison> Service::Comparisons(
    const PolicyId& policy_id) const {
  std::lock_guard lock(mu_);
  const PolicyState& state = PolicyOrThrow(policy_id);
  std::vector<AggregatedComparison> out;
  for (const auto& [pair, idx] : state.hits_by_pair) {
    std::vector<Vote> votes;
    for (std::size_t i : idx) {
      const auto it = state.vote_of_hit.find(state.hits[i].id);
      if (it == state.vote_of_hit.end()) break;
      votes.push_back(state.votes[it->second]);
    }
    if (votes.size() == idx.size()) out.push_back(AggregatePair(policy_id, votes));
  }
  return out;
}

BTModel Service::FitModel(const PolicyId& policy_id,
                          const FitOptions& options) const {
  const auto comparisons = Comparisons(policy_id);
  std::vector<StatementId> ids;
  {
    std::lock_guard lock(mu_);
    for (const auto& s : PolicyOrThrow(policy_id).doc.statements) ids.push_back(s.id);
  }
  return FitBradleyTerry(policy_id, ExtractWinTuples(comparisons), ids, options);
}

PolicyDocument Service::Policy(const PolicyId& policy_id) const {
  std::lock_guard lock(mu_);
  return PolicyOrThrow(policy_id).doc;
}

std::vector<PolicyId> Service::Policies() const {
  std::lock_guard lock(mu_);
  std::vector<PolicyId> out;
  for (const auto& [id, state] : policies_) out.push_back(id);
  return out;
}

std::vector<EventRecord> Service::Events() const {
  std::lock_guard lock(mu_);
  return log_.records();
}

std::vector<std::string> Service::AuditInvariants() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> problems;
  auto report = [&](const std::string& what) { problems.push_back(what); };
  for (const auto& [policy_id, state] : policies_) {
    for (const auto& [pair, idx] : state.hits_by_pair) {
      const std::string name = pair.a.str() + "/" + pair.b.str();
      if (idx.size() != static_cast<std::size_t>(kVotesPerPair)) {
        report(name + ": " + std::to_string(idx.size()) + " slots");
      }
      std::array<int, 2> per_presentation{0, 0};
      std::array<int, 2> busy{0, 0};
      std::set<WorkerId> seen;
      for (std::size_t i : idx) {
        const Hit& h = state.hits[i];
        const int p = h.presentation == Presentation::kBA;
        ++per_presentation[p];
        if (h.status == HitStatus::kOpen) {
          if (h.worker) report(h.id.str() + ": open with a worker");
          continue;
        }
        ++busy[p];
        if (!h.worker) {
          report(h.id.str() + ": no worker");
          continue;
        }
        if (!seen.insert(*h.worker).second) {
          report(name + ": worker " + h.worker->str() + " holds two slots");
        }
        const auto wit = workers_.find(*h.worker);
        if (wit == workers_.end()) {
          report(h.id.str() + ": unknown worker " + h.worker->str());
          continue;
        }
        const WorkerState& w = wit->second;
        if (h.status == HitStatus::kCompleted) {
          if (!w.votes.contains(h.id)) report(h.id.str() + ": completed without a vote");
          if (!state.vote_of_hit.contains(h.id)) report(h.id.str() + ": vote not stored");
        } else if (!w.held.contains(h.id) || !lease_expiry_.contains(h.id)) {
          report(h.id.str() + ": assignment not tracked");
        }
      }
      for (int p = 0; p < 2; ++p) {
        if (per_presentation[p] != kSlotsPerPresentation || busy[p] > kSlotsPerPresentation) {
          report(name + ": presentation balance broken");
        }
      }
    }
  }
  for (const auto& [worker_id, w] : workers_) {
    std::set<PairKey> voted;
    for (const auto& [hit_id, vote] : w.votes) {
      if (!voted.insert(vote.pair).second) {
        report(worker_id.str() + ": two votes on one pair");
      }
    }
    if (voted != w.completed_pairs) report(worker_id.str() + ": completed pairs drift");
  }
  return problems;
}

SimulationReport Service::SimulateWorkers(
    const PolicyId& policy_id, const std::map<StatementId, double>& abilities,
    const SimulationOptions& options) {
  if (options.workers < static_cast<std::size_t>(kVotesPerPair)) {
    throw Error(ErrorCode::kInsufficientWorkers,
                "need at least 6 workers to fill every pair");
  }
  if (!(options.noise >= 0 && options.noise <= 1) ||
      !(options.tie_probability >= 0 && options.tie_probability <= 1)) {
    throw Error(ErrorCode::kInvalidInput, "probabilities must be in [0, 1]");
  }
  for (const auto& s : Policy(policy_id).statements) {
    if (!abilities.contains(s.id)) {
      throw Error(ErrorCode::kUnknownStatement, "no planted ability for " + s.id.str());
    }
  }
  std::vector<WorkerId> workers;
  for (std::size_t w = 0; w < options.workers; ++w) {
    char name[32];
    std::snprintf(name, sizeof(name), "sim-%03zu", w);
    workers.emplace_back(name);
    RegisterWorker(workers.back(), true);
  }
  Rng rng(options.seed);
  SimulationReport report;
  std::vector<bool> done(workers.size(), false);
  std::size_t active = workers.size();
  while (active > 0) {
    for (std::size_t w = 0; w < workers.size(); ++w) {
      if (done[w]) continue;
      TaskAssignment task;
      try {
        task = AssignTask(workers[w]);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNoTaskAvailable) throw;
        done[w] = true;
        --active;
        continue;
      }
      ++report.assignments;
      const double t1 = abilities.at(task.statement_1);
      const double t2 = abilities.at(task.statement_2);
      Choice choice;
      if (rng.Bernoulli(options.tie_probability)) {
        choice = Choice::kEqual;
      } else {
        bool first = options.sample_from_model
                         ? rng.Bernoulli(1.0 / (1.0 + std::exp(t2 - t1)))
                         : t1 >= t2;
        if (rng.Bernoulli(options.noise)) first = !first;
        choice = first ? Choice::kFirst : Choice::kSecond;
      }
      SubmitVote(workers[w], task.hit_id, choice);
      ++report.votes;
      ++report.votes_per_worker[workers[w]];
    }
  }
  return report;
}

}  // namespace tcrank
