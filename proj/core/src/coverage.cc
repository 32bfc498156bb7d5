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

#include "tcrank/coverage.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/max_cardinality_matching.hpp>

#include "tcrank/error.h"
#include "tcrank/random.h"

namespace tcrank {
namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

// Mate of every vertex in a maximum cardinality matching, kNone when
// unmatched.
std::vector<std::size_t> MaximumMatching(std::size_t n,
                                         std::span<const Edge> edges) {
  using Graph =
      boost::adjacency_list<boost::vecS, boost::vecS, boost::undirectedS>;
  Graph g(n);
  for (const auto& [u, v] : edges) {
    if (u != v) boost::add_edge(u, v, g);
  }
  std::vector<boost::graph_traits<Graph>::vertex_descriptor> mate(n);
  boost::edmonds_maximum_cardinality_matching(g, mate.data());
  std::vector<std::size_t> out(n, kNone);
  const auto null = boost::graph_traits<Graph>::null_vertex();
  for (std::size_t v = 0; v < n; ++v) {
    if (mate[v] != null) out[v] = mate[v];
  }
  return out;
}

std::vector<bool> CoveredVertices(std::size_t n, std::span<const Edge> edges) {
  std::vector<bool> covered(n, false);
  for (const auto& [u, v] : edges) {
    covered[u] = true;
    covered[v] = true;
  }
  return covered;
}

}  // namespace

std::size_t RoundHalfUp(double fraction, std::size_t n) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw Error(ErrorCode::kInvalidInput, "fraction must be in (0, 1]");
  }
  // The epsilon absorbs representation error such as 0.1 * 30 = 3.0000000004
  // or 0.5 * 95 = 47.4999...
  return static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(n) + 0.5 + 1e-9));
}

std::size_t MaximumMatchingSize(std::size_t vertex_count,
                                std::span<const Edge> edges) {
  const auto match = MaximumMatching(vertex_count, edges);
  std::size_t matched = 0;
  for (std::size_t m : match) matched += (m != kNone);
  return matched / 2;
}

std::size_t MinimumEdgeCover(std::size_t vertex_count,
                             std::span<const Edge> edges) {
  const auto covered = CoveredVertices(vertex_count, edges);
  const auto covered_count =
      static_cast<std::size_t>(std::count(covered.begin(), covered.end(), true));
  return covered_count - MaximumMatchingSize(vertex_count, edges);
}

std::vector<std::size_t> SampleCoveringEdges(std::size_t vertex_count,
                                             std::span<const Edge> edges,
                                             std::size_t count,
                                             std::uint64_t seed) {
  if (count > edges.size()) {
    throw Error(ErrorCode::kInvalidInput, "sample larger than population");
  }
  const std::size_t minimum = MinimumEdgeCover(vertex_count, edges);
  if (count < minimum) throw CoverageInfeasibleError(count, minimum);

  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.Shuffle(order);

  std::vector<std::size_t> selected(order.begin(), order.begin() + count);
  std::vector<std::size_t> rest(order.begin() + count, order.end());
  std::vector<std::size_t> hits(vertex_count, 0);
  for (std::size_t e : selected) {
    ++hits[edges[e].first];
    ++hits[edges[e].second];
  }
  const auto covered = CoveredVertices(vertex_count, edges);

  bool stuck = false;
  for (std::size_t v = 0; v < vertex_count && !stuck; ++v) {
    if (!covered[v] || hits[v] > 0) continue;
    std::size_t pick = kNone;
    for (std::size_t r = 0; r < rest.size(); ++r) {
      const auto [a, b] = edges[rest[r]];
      if (a != v && b != v) continue;
      const std::size_t other = (a == v) ? b : a;
      if (pick == kNone) pick = r;
      if (hits[other] == 0) {
        pick = r;
        break;
      }
    }
    // Every covered vertex has some edge; it is unsampled since hits[v] == 0.
    const std::size_t added = rest[pick];
    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(pick));
    ++hits[edges[added].first];
    ++hits[edges[added].second];

    std::size_t drop = kNone;
    for (std::size_t s = selected.size(); s-- > 0;) {
      const auto [a, b] = edges[selected[s]];
      if (hits[a] >= 2 && hits[b] >= 2) {
        drop = s;
        break;
      }
    }
    selected.push_back(added);
    if (drop == kNone) {
      stuck = true;
      break;
    }
    const std::size_t removed = selected[drop];
    selected.erase(selected.begin() + static_cast<std::ptrdiff_t>(drop));
    --hits[edges[removed].first];
    --hits[edges[removed].second];
    rest.push_back(removed);
  }

  if (stuck) {
    const auto match = MaximumMatching(vertex_count, edges);
    std::vector<bool> taken(edges.size(), false);
    std::vector<bool> touched(vertex_count, false);
    selected.clear();
    // Matched edges first, in draw order, then one edge per remaining vertex.
    for (std::size_t e : order) {
      const auto [a, b] = edges[e];
      if (match[a] == b && !touched[a] && !touched[b]) {
        taken[e] = true;
        touched[a] = touched[b] = true;
        selected.push_back(e);
      }
    }
    for (std::size_t e : order) {
      const auto [a, b] = edges[e];
      if (taken[e] || (touched[a] && touched[b])) continue;
      taken[e] = true;
      touched[a] = touched[b] = true;
      selected.push_back(e);
    }
    for (std::size_t e : order) {
      if (selected.size() >= count) break;
      if (!taken[e]) {
        taken[e] = true;
        selected.push_back(e);
      }
    }
  }

  std::sort(selected.begin(), selected.end());
  return selected;
}

}  // namespace tcrank
