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

#include "tcrank/textstats.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include "tcrank/corpus.h"
#include "tcrank/csv.h"
#include "tcrank/error.h"

namespace tcrank {
namespace {

bool IsVowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

std::map<StatementId, double> RelativeRanks(
    const std::map<PolicyId, Ranking>& rankings) {
  std::map<StatementId, double> out;
  for (const auto& [policy, ranking] : rankings) {
    for (const auto& [id, rank] : ranking.rank_of) {
      out[id] = static_cast<double>(rank) / static_cast<double>(ranking.size());
    }
  }
  return out;
}

}  // namespace

std::size_t CountSyllables(std::string_view word) {
  if (word.empty()) throw Error(ErrorCode::kInvalidInput, "empty token");
  std::string letters;
  for (char c : word) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      letters += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  std::size_t groups = 0;
  bool in_group = false;
  for (char c : letters) {
    const bool vowel = IsVowel(c);
    if (vowel && !in_group) ++groups;
    in_group = vowel;
  }
  const std::size_t n = letters.size();
  const bool lone_final_e =
      n >= 2 && letters[n - 1] == 'e' && !IsVowel(letters[n - 2]);
  const bool consonant_le =
      n >= 3 && letters[n - 2] == 'l' && !IsVowel(letters[n - 3]);
  if (lone_final_e && !consonant_le && groups > 1) --groups;
  return std::max<std::size_t>(groups, 1);
}

double FleschReadingEase(std::size_t words, std::size_t sentences,
                         std::size_t syllables) {
  return 206.835 -
         1.015 * (static_cast<double>(words) / static_cast<double>(sentences)) -
         84.6 * (static_cast<double>(syllables) / static_cast<double>(words));
}

ReadabilityScore ScoreReadability(std::string_view text,
                                  StatementId statement_id) {
  ReadabilityScore score;
  score.statement_id = std::move(statement_id);
  std::istringstream in{std::string(text)};
  std::string token;
  while (in >> token) {
    const bool has_alnum =
        std::any_of(token.begin(), token.end(), [](char c) {
          return std::isalnum(static_cast<unsigned char>(c)) != 0;
        });
    if (!has_alnum) continue;
    ++score.words;
    score.syllables += CountSyllables(token);
  }
  if (score.words == 0) {
    throw Error(ErrorCode::kInvalidInput, "text has no words");
  }
  score.sentences = std::max<std::size_t>(1, SplitSentences(text).size());
  score.flesch = FleschReadingEase(score.words, score.sentences, score.syllables);
  return score;
}

std::string_view FleschBand(double flesch) {
  if (flesch < 20) return "very_difficult";
  if (flesch < 50) return "difficult";
  if (flesch < 80) return "standard";
  return "easy";
}

KendallResult ReadabilityVsRank(std::span<const ReadabilityScore> scores,
                                const std::map<PolicyId, Ranking>& rankings) {
  if (scores.empty()) throw Error(ErrorCode::kEmptyInput, "no readability scores");
  const auto relative = RelativeRanks(rankings);
  std::vector<double> flesch, rank;
  for (const auto& s : scores) {
    const auto it = relative.find(s.statement_id);
    if (it == relative.end()) {
      throw Error(ErrorCode::kUnknownStatement,
                  "no rank for " + s.statement_id.str());
    }
    flesch.push_back(s.flesch);
    rank.push_back(it->second);
  }
  if (flesch.size() < 2) {
    throw Error(ErrorCode::kInsufficientData, "need at least 2 statements");
  }
  return KendallTau(flesch, rank);
}

double ChiSquare(const Contingency& t) {
  const double a = static_cast<double>(t.a), b = static_cast<double>(t.b);
  const double c = static_cast<double>(t.c), d = static_cast<double>(t.d);
  const double denom = (a + b) * (c + d) * (a + c) * (b + d);
  if (denom == 0) return 0;
  const double diff = a * d - b * c;
  return (a + b + c + d) * diff * diff / denom;
}

std::vector<WordChiSquare> ChiSquareWords(std::span<const LabeledTokens> rows,
                                          std::size_t top_k) {
  std::size_t important = 0;
  for (const auto& r : rows) important += r.important;
  const std::size_t unimportant = rows.size() - important;
  if (important == 0 || unimportant == 0) {
    throw Error(ErrorCode::kInvalidLabels,
                "chi-square needs both important and unimportant statements");
  }
  // Presence counts per class.
  std::map<std::string, std::pair<std::size_t, std::size_t>> present;
  for (const auto& r : rows) {
    const std::set<std::string> distinct(r.tokens.begin(), r.tokens.end());
    for (const auto& token : distinct) {
      auto& counts = present[token];
      (r.important ? counts.first : counts.second) += 1;
    }
  }
  std::vector<WordChiSquare> out;
  out.reserve(present.size());
  for (const auto& [word, counts] : present) {
    WordChiSquare w;
    w.word = word;
    w.table = {counts.first, counts.second, important - counts.first,
               unimportant - counts.second};
    w.chi2 = ChiSquare(w.table);
    out.push_back(std::move(w));
  }
  // `present` is ordered by token, so a stable sort keeps token order on ties.
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& x, const auto& y) { return x.chi2 > y.chi2; });
  if (out.size() > top_k) out.resize(top_k);
  return out;
}

std::map<StatementId, bool> LabelTopPercent(
    const std::map<PolicyId, Ranking>& rankings, double percent) {
  if (!(percent > 0) || percent > 100) {
    throw Error(ErrorCode::kInvalidThreshold, "percent must be in (0, 100]");
  }
  std::map<StatementId, bool> out;
  for (const auto& [policy, ranking] : rankings) {
    const std::size_t n = ranking.size();
    const auto top = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::floor(percent * static_cast<double>(n) / 100.0 + 1e-9)));
    for (std::size_t i = 0; i < n; ++i) out[ranking.ordered[i]] = i < top;
  }
  return out;
}

void WriteReadabilityCsv(std::ostream& os,
                         std::span<const ReadabilityScore> scores,
                         const std::map<PolicyId, Ranking>& rankings) {
  const auto relative = RelativeRanks(rankings);
  WriteCsvRow(os, {"statement_id", "words", "syllables", "flesch",
                   "relative_rank"});
  for (const auto& s : scores) {
    const auto it = relative.find(s.statement_id);
    WriteCsvRow(os, {s.statement_id.str(), std::to_string(s.words),
                     std::to_string(s.syllables), FormatDouble(s.flesch),
                     it == relative.end() ? "" : FormatDouble(it->second)});
  }
}

void WriteChiSquareCsv(std::ostream& os, std::span<const WordChiSquare> rows) {
  WriteCsvRow(os, {"word", "chi2", "a", "b", "c", "d"});
  for (const auto& r : rows) {
    WriteCsvRow(os, {r.word, FormatDouble(r.chi2), std::to_string(r.table.a),
                     std::to_string(r.table.b), std::to_string(r.table.c),
                     std::to_string(r.table.d)});
  }
}

}  // namespace tcrank
