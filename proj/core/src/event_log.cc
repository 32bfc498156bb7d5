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

#include "tcrank/event_log.h"

#include <array>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "tcrank/error.h"

namespace tcrank {
namespace {

using nlohmann::json;

constexpr std::array<std::pair<EventKind, std::string_view>, 6> kKindNames = {{
    {EventKind::kPolicyIngested, "policy_ingested"},
    {EventKind::kHitsGenerated, "hits_generated"},
    {EventKind::kWorkerRegistered, "worker_registered"},
    {EventKind::kHitAssigned, "hit_assigned"},
    {EventKind::kVoteRecorded, "vote_recorded"},
    {EventKind::kAssignmentExpired, "assignment_expired"},
}};

// Byte length of the prefix of `path` that ends in a newline.
std::uintmax_t CompletePrefixLength(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::uintmax_t length = 0, pos = 0;
  char c;
  while (in.get(c)) {
    ++pos;
    if (c == '\n') length = pos;
  }
  return length;
}

}  // namespace

std::string_view EventKindName(EventKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

EventKind ParseEventKind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  throw Error(ErrorCode::kParseError, "unknown event kind: " + std::string(name));
}

std::string EncodeEvent(const EventRecord& record) {
  json j;
  j["seq"] = record.sequence;
  j["kind"] = EventKindName(record.kind);
  j["ts"] = record.timestamp_ms;
  j["payload"] = json::parse(record.payload);
  return j.dump();
}

EventRecord DecodeEvent(std::string_view line) {
  try {
    const json j = json::parse(line);
    EventRecord r;
    r.sequence = j.at("seq").get<std::uint64_t>();
    r.kind = ParseEventKind(j.at("kind").get<std::string>());
    r.timestamp_ms = j.at("ts").get<std::int64_t>();
    r.payload = j.at("payload").dump();
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("bad event: ") + e.what());
  }
}

std::vector<EventRecord> ReadEvents(std::istream& is) {
  std::vector<EventRecord> out;
  std::string line;
  while (std::getline(is, line)) {
    if (is.eof()) break;  // no trailing newline: interrupted write
    if (line.empty()) continue;
    EventRecord r = DecodeEvent(line);
    if (r.sequence != out.size() + 1) {
      throw Error(ErrorCode::kParseError,
                  "event sequence " + std::to_string(r.sequence) +
                      " where " + std::to_string(out.size() + 1) +
                      " was expected");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<EventRecord> ReadEventFile(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return {};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  return ReadEvents(in);
}

void EventLog::Open(std::filesystem::path path) {
  path_ = std::move(path);
  if (path_.has_parent_path()) {
    std::filesystem::create_directories(path_.parent_path());
  }
  if (std::filesystem::exists(path_)) {
    const auto keep = CompletePrefixLength(path_);
    if (keep != std::filesystem::file_size(path_)) {
      std::filesystem::resize_file(path_, keep);
    }
  }
  out_.open(path_, std::ios::binary | std::ios::app);
  if (!out_) throw Error(ErrorCode::kIoError, "cannot open " + path_.string());
}

const EventRecord& EventLog::Append(EventKind kind, std::int64_t timestamp_ms,
                                    std::string payload) {
  EventRecord r;
  r.sequence = next_sequence();
  r.kind = kind;
  r.timestamp_ms = timestamp_ms;
  r.payload = std::move(payload);
  if (out_.is_open()) {
    out_ << EncodeEvent(r) << '\n';
    out_.flush();
    if (!out_) throw Error(ErrorCode::kIoError, "write to " + path_.string() + " failed");
  }
  records_.push_back(std::move(r));
  return records_.back();
}

void EventLog::Restore(std::vector<EventRecord> records) {
  records_ = std::move(records);
}

}  // namespace tcrank
