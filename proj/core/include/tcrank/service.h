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

// Task-allocation and vote-recording service.
//
// All state changes are events: a command validates its input, appends an
// event to the log and then applies that event to the in-memory state, the
// same way a replay does. A single mutex serializes commands and reads.

#ifndef TCRANK_SERVICE_H_
#define TCRANK_SERVICE_H_

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tcrank/btrank.h"
#include "tcrank/corpus.h"
#include "tcrank/event_log.h"
#include "tcrank/ids.h"
#include "tcrank/pairing.h"

namespace tcrank {

// Milliseconds since the epoch.
using Clock = std::function<std::int64_t()>;
std::int64_t SystemClockMs();

struct ServiceOptions {
  std::chrono::milliseconds lease = std::chrono::minutes(10);
  // Seeds the assignment choice; each assignment uses a stream derived from
  // this seed and the event sequence number.
  std::uint64_t seed = 0;
  // Empty: keep the event log in memory only.
  std::filesystem::path log_path;
};

struct TaskAssignment {
  HitId hit_id;
  PolicyId policy_id;
  Presentation presentation = Presentation::kAB;
  // In presentation order.
  StatementId statement_1;
  StatementId statement_2;
  std::string statement_1_text;
  std::string statement_2_text;
  std::string source_url;
  std::int64_t expires_at_ms = 0;
};

struct VoteAck {
  HitId hit_id;
  PairKey pair;
  Choice choice = Choice::kEqual;
  int canonical_score = 0;
  std::uint64_t sequence = 0;
  // True when this was a retry of an already recorded vote.
  bool duplicate = false;
};

struct PolicyStatus {
  PolicyId policy_id;
  std::size_t statements = 0;
  std::size_t total_hits = 0;
  std::size_t completed = 0;
  std::size_t open = 0;
  std::size_t assigned = 0;
  std::size_t pairs = 0;
  std::size_t pairs_fully_voted = 0;

  friend bool operator==(const PolicyStatus&, const PolicyStatus&) = default;
};

struct SimulationOptions {
  std::size_t workers = 6;
  // Probability that a vote names the statement with the lower planted
  // ability.
  double noise = 0.0;
  // Probability that a vote is "equal".
  double tie_probability = 0.0;
  // Draw the preferred statement from the Bradley-Terry probability
  // a_i / (a_i + a_j) instead of always taking the stronger one.
  bool sample_from_model = false;
  std::uint64_t seed = 0;
};

struct SimulationReport {
  std::size_t votes = 0;
  std::size_t assignments = 0;
  std::map<WorkerId, std::size_t> votes_per_worker;
};

class Service {
 public:
  // Replays `options.log_path` when it exists.
  explicit Service(ServiceOptions options = {}, Clock clock = SystemClockMs);

  // Builds a service from events without writing to any log.
  static std::unique_ptr<Service> FromEvents(std::span<const EventRecord> events,
                                             ServiceOptions options = {},
                                             Clock clock = SystemClockMs);

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // kAlreadyExists when the policy id is taken.
  PolicyDocument IngestPolicy(const PolicyId& policy_id,
                              const std::string& source_url,
                              const std::string& raw_text);
  // Returns the number of Hits. kUnknownPolicy, kAlreadyExists when Hits
  // exist, errors of GenerateHits.
  std::size_t GenerateHits(const PolicyId& policy_id, double fraction,
                           std::uint64_t seed);
  // Re-registering with the same flag is a no-op; a different flag is
  // kAlreadyExists.
  void RegisterWorker(const WorkerId& worker_id, bool qualified);

  // kUnknownWorker, kUnqualifiedWorker, kNoTaskAvailable.
  TaskAssignment AssignTask(const WorkerId& worker_id);
  // kUnknownWorker, kUnknownHit, kStaleAssignment, kConflictingResubmission.
  VoteAck SubmitVote(const WorkerId& worker_id, const HitId& hit_id,
                     Choice choice);
  // Returns expired leases to open. Called by AssignTask; public for
  // periodic sweeps.
  std::size_t ExpireLeases();

  // kUnknownPolicy.
  PolicyStatus Status(const PolicyId& policy_id) const;
  std::vector<Hit> Hits(const PolicyId& policy_id) const;
  std::vector<Vote> Votes(const PolicyId& policy_id) const;
  // Aggregates of all fully voted pairs, in pair order.
  std::vector<AggregatedComparison> Comparisons(const PolicyId& policy_id) const;
  BTModel FitModel(const PolicyId& policy_id, const FitOptions& options = {}) const;
  PolicyDocument Policy(const PolicyId& policy_id) const;
  std::vector<PolicyId> Policies() const;
  std::vector<EventRecord> Events() const;

  // Descriptions of violated invariants (slot conservation, presentation
  // balance, unique workers per pair, consistent worker bookkeeping).
  std::vector<std::string> AuditInvariants() const;

  // Synthetic workers sim-000..; each loops assign -> vote until no task is
  // left for anyone. kInsufficientWorkers below six workers,
  // kUnknownStatement when `abilities` misses a statement.
  SimulationReport SimulateWorkers(const PolicyId& policy_id,
                                   const std::map<StatementId, double>& abilities,
                                   const SimulationOptions& options);

 private:
  struct PolicyState {
    PolicyDocument doc;
    std::map<StatementId, std::size_t> statement_index;
    bool hits_generated = false;
    std::vector<Hit> hits;
    std::map<PairKey, std::vector<std::size_t>> hits_by_pair;
    std::vector<Vote> votes;
    std::map<HitId, std::size_t> vote_of_hit;
  };
  struct HitRef {
    PolicyId policy_id;
    std::size_t index = 0;
  };
  struct WorkerState {
    bool qualified = false;
    std::set<PairKey> completed_pairs;
    std::map<HitId, std::int64_t> held;  // hit -> lease expiry
    std::map<HitId, Vote> votes;
    std::map<HitId, std::uint64_t> vote_sequence;
  };

  Service(ServiceOptions options, Clock clock, bool open_log);

  void Apply(const EventRecord& event);
  const EventRecord& Emit(EventKind kind, std::int64_t now, std::string payload);
  void ExpireLocked(std::int64_t now);
  const PolicyState& PolicyOrThrow(const PolicyId& id) const;
  WorkerState& WorkerOrThrow(const WorkerId& id);
  Hit& HitAt(const HitRef& ref);
  const Hit& HitAt(const HitRef& ref) const;

  ServiceOptions options_;
  Clock clock_;
  mutable std::mutex mu_;
  EventLog log_;
  std::map<PolicyId, PolicyState> policies_;
  std::map<WorkerId, WorkerState> workers_;
  std::map<HitId, HitRef> hit_refs_;
  std::map<HitId, std::int64_t> lease_expiry_;
};

}  // namespace tcrank

#endif  // TCRANK_SERVICE_H_
