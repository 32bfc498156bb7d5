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

#include "tcrank/embeddings.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tcrank/csv.h"
#include "tcrank/error.h"
#include "tcrank/random.h"

namespace tcrank {
namespace {

std::uint64_t Fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

EmbeddingTable EmbeddingTable::Load(std::istream& is) {
  EmbeddingTable table;
  std::string line;
  if (!std::getline(is, line)) {
    throw Error(ErrorCode::kParseError, "embedding file is empty");
  }
  std::istringstream header(line);
  std::size_t vocab = 0, dim = 0;
  if (!(header >> vocab >> dim) || dim == 0) {
    throw Error(ErrorCode::kParseError, "bad embedding header: " + line);
  }
  table.dimension_ = dim;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream row(line);
    std::string token;
    row >> token;
    std::vector<double> v;
    v.reserve(dim);
    double x;
    while (row >> x) v.push_back(x);
    if (!row.eof() || v.size() != dim) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line_no) + ": expected " +
                      std::to_string(dim) + " values for '" + token + "'");
    }
    table.vectors_[token] = std::move(v);
  }
  if (table.vectors_.size() != vocab) {
    throw Error(ErrorCode::kParseError,
                "header declares " + std::to_string(vocab) + " vectors, found " +
                    std::to_string(table.vectors_.size()));
  }
  return table;
}

EmbeddingTable EmbeddingTable::LoadFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return Load(in);
}

EmbeddingTable EmbeddingTable::Fallback(std::uint64_t seed,
                                        std::size_t dimension) {
  if (dimension == 0) {
    throw Error(ErrorCode::kInvalidInput, "embedding dimension must be positive");
  }
  EmbeddingTable table;
  table.dimension_ = dimension;
  table.fallback_ = true;
  table.seed_ = seed;
  return table;
}

std::optional<std::vector<double>> EmbeddingTable::Lookup(
    std::string_view token) const {
  if (const auto it = vectors_.find(std::string(token)); it != vectors_.end()) {
    return it->second;
  }
  if (!fallback_) return std::nullopt;
  Rng rng(DeriveSeed(seed_, Fnv1a(token)));
  std::vector<double> v(dimension_);
  double norm = 0;
  while (norm == 0) {
    for (auto& x : v) x = rng.Normal();
    norm = 0;
    for (double x : v) norm += x * x;
  }
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return v;
}

void EmbeddingTable::Add(std::string token, std::vector<double> vector) {
  if (vector.size() != dimension_) {
    throw Error(ErrorCode::kInvalidInput,
                "vector for '" + token + "' has dimension " +
                    std::to_string(vector.size()));
  }
  vectors_[std::move(token)] = std::move(vector);
}

void EmbeddingTable::Save(std::ostream& os) const {
  os << vectors_.size() << ' ' << dimension_ << '\n';
  std::vector<const std::string*> tokens;
  for (const auto& [t, v] : vectors_) tokens.push_back(&t);
  std::sort(tokens.begin(), tokens.end(),
            [](const auto* a, const auto* b) { return *a < *b; });
  for (const auto* t : tokens) {
    os << *t;
    for (double x : vectors_.at(*t)) os << ' ' << FormatDouble(x);
    os << '\n';
  }
}

}  // namespace tcrank
