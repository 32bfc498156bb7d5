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

// Random subsets of statement pairs that still touch every statement.

#ifndef TCRANK_COVERAGE_H_
#define TCRANK_COVERAGE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace tcrank {

// An undirected edge between two dense vertex indices.
using Edge = std::pair<std::size_t, std::size_t>;

// round(fraction * n) with halves rounded up. fraction must be in (0, 1]
// (kInvalidInput otherwise).
std::size_t RoundHalfUp(double fraction, std::size_t n);

// Size of a maximum matching in a general graph (Edmonds' blossom algorithm).
std::size_t MaximumMatchingSize(std::size_t vertex_count,
                                std::span<const Edge> edges);

// Smallest number of edges touching every vertex that has at least one edge:
// covered vertices minus maximum matching size.
std::size_t MinimumEdgeCover(std::size_t vertex_count,
                             std::span<const Edge> edges);

// Draws `count` distinct edges uniformly at random, then repairs the draw so
// that every vertex with an edge is touched: for each uncovered vertex (in
// index order) an unsampled edge through it is swapped in (preferring edges
// whose other end is uncovered too) and the most recently drawn redundant edge
// is swapped out. If no redundant edge remains, the result is rebuilt from a
// minimum edge cover topped up in draw order. Returns ascending edge indices.
// Deterministic given `seed`. Throws CoverageInfeasibleError when `count` is
// below MinimumEdgeCover.
std::vector<std::size_t> SampleCoveringEdges(std::size_t vertex_count,
                                             std::span<const Edge> edges,
                                             std::size_t count,
                                             std::uint64_t seed);

}  // namespace tcrank

#endif  // TCRANK_COVERAGE_H_
