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

#ifndef TCRANK_EMBEDDINGS_H_
#define TCRANK_EMBEDDINGS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tcrank {

inline constexpr std::size_t kEmbeddingDimension = 100;

// Token -> dense vector lookup. A table is either loaded from a word-vector
// file (out-of-vocabulary tokens have no vector) or a synthetic fallback that
// assigns every token a pseudo-random unit vector derived from the token and
// a seed. The fallback exists for tests and for runs without a vector file.
class EmbeddingTable {
 public:
  // Text format: a "V D" header line, then V lines "token v1 ... vD".
  // kParseError on malformed input or a vector of the wrong length.
  static EmbeddingTable Load(std::istream& is);
  static EmbeddingTable LoadFile(const std::filesystem::path& path);
  static EmbeddingTable Fallback(std::uint64_t seed = 0,
                                 std::size_t dimension = kEmbeddingDimension);

  std::size_t dimension() const { return dimension_; }
  // Number of stored vectors; 0 for a fallback table.
  std::size_t vocabulary_size() const { return vectors_.size(); }
  bool is_fallback() const { return fallback_; }
  std::uint64_t fallback_seed() const { return seed_; }

  std::optional<std::vector<double>> Lookup(std::string_view token) const;

  void Add(std::string token, std::vector<double> vector);
  void Save(std::ostream& os) const;

 private:
  std::size_t dimension_ = kEmbeddingDimension;
  bool fallback_ = false;
  std::uint64_t seed_ = 0;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

}  // namespace tcrank

#endif  // TCRANK_EMBEDDINGS_H_
