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

// Append-only JSON-lines event log.

#ifndef TCRANK_EVENT_LOG_H_
#define TCRANK_EVENT_LOG_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tcrank {

enum class EventKind {
  kPolicyIngested,
  kHitsGenerated,
  kWorkerRegistered,
  kHitAssigned,
  kVoteRecorded,
  kAssignmentExpired,
};

std::string_view EventKindName(EventKind kind);
// kParseError for unknown names.
EventKind ParseEventKind(std::string_view name);

struct EventRecord {
  std::uint64_t sequence = 0;
  EventKind kind = EventKind::kPolicyIngested;
  std::int64_t timestamp_ms = 0;
  // Kind-specific JSON object.
  std::string payload = "{}";
};

// One line: {"seq":..,"kind":..,"ts":..,"payload":{..}}.
std::string EncodeEvent(const EventRecord& record);
EventRecord DecodeEvent(std::string_view line);

// Reads every complete record. A final line without a newline is the trace
// of an interrupted write and is skipped; any other malformed line, or a
// sequence number out of order, is kParseError.
std::vector<EventRecord> ReadEvents(std::istream& is);
std::vector<EventRecord> ReadEventFile(const std::filesystem::path& path);

// Sequences start at 1 and increase by one per record. Without a path the
// log lives in memory only.
class EventLog {
 public:
  EventLog() = default;
  // Opens `path` for appending after truncating any partial final line.
  explicit EventLog(std::filesystem::path path) { Open(std::move(path)); }

  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;

  void Open(std::filesystem::path path);

  // Assigns the next sequence number, persists and flushes. kIoError when
  // the write fails.
  const EventRecord& Append(EventKind kind, std::int64_t timestamp_ms,
                            std::string payload);

  // Adopts records read back from disk without writing them again.
  void Restore(std::vector<EventRecord> records);

  const std::vector<EventRecord>& records() const { return records_; }
  std::uint64_t next_sequence() const { return records_.size() + 1; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::vector<EventRecord> records_;
};

}  // namespace tcrank

#endif  // TCRANK_EVENT_LOG_H_
