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

#ifndef TCRANK_IDS_H_
#define TCRANK_IDS_H_

#include <compare>
#include <cstddef>
#include <functional>
#include <ostream>
#include <string>
#include <utility>

namespace tcrank {

// Opaque string identifier, distinct per tag so that a statement id cannot be
// passed where a worker id is expected. Ordered lexicographically.
template <typename Tag>
class Id {
 public:
  Id() = default;
  explicit Id(std::string value) : value_(std::move(value)) {}

  const std::string& str() const { return value_; }
  bool empty() const { return value_.empty(); }

  friend auto operator<=>(const Id&, const Id&) = default;
  friend bool operator==(const Id&, const Id&) = default;

  friend std::ostream& operator<<(std::ostream& os, const Id& id) {
    return os << id.value_;
  }

 private:
  std::string value_;
};

struct PolicyTag;
struct StatementTag;
struct WorkerTag;
struct HitTag;

using PolicyId = Id<PolicyTag>;
using StatementId = Id<StatementTag>;
using WorkerId = Id<WorkerTag>;
using HitId = Id<HitTag>;

}  // namespace tcrank

template <typename Tag>
struct std::hash<tcrank::Id<Tag>> {
  std::size_t operator()(const tcrank::Id<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};

#endif  // TCRANK_IDS_H_
