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

// Readability and word-importance statistics over ranked statements.

#ifndef TCRANK_TEXTSTATS_H_
#define TCRANK_TEXTSTATS_H_

#include <cstddef>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tcrank/btrank.h"
#include "tcrank/ids.h"
#include "tcrank/sampling.h"

namespace tcrank {

// Syllable heuristic, version 1: lowercase the letters of the token, count
// maximal runs of [aeiouy], and drop one for a final silent "e" (a lone
// final "e" after a consonant, except in a consonant + "le" ending). The
// result is at least 1. kInvalidInput for an empty token.
std::size_t CountSyllables(std::string_view word);

struct ReadabilityScore {
  StatementId statement_id;
  std::size_t words = 0;
  std::size_t sentences = 1;
  std::size_t syllables = 0;
  double flesch = 0;
};

// 206.835 - 1.015 * words / sentences - 84.6 * syllables / words.
double FleschReadingEase(std::size_t words, std::size_t sentences,
                         std::size_t syllables);

// Words are whitespace tokens with at least one letter or digit; sentences
// follow the corpus segmentation rules (at least 1). kInvalidInput when the
// text has no words.
ReadabilityScore ScoreReadability(std::string_view text,
                                  StatementId statement_id = {});

// "very_difficult" (< 20), "difficult" (20-50), "standard" (50-80) or
// "easy" (>= 80).
std::string_view FleschBand(double flesch);

// Kendall tau-b between Flesch scores and relative ranks (rank / N), pooled
// over all policies. kEmptyInput without scores; kUnknownStatement when a
// scored statement is not ranked.
KendallResult ReadabilityVsRank(std::span<const ReadabilityScore> scores,
                                const std::map<PolicyId, Ranking>& rankings);

// 2x2 presence table: a = present & important, b = present & unimportant,
// c = absent & important, d = absent & unimportant.
struct Contingency {
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t c = 0;
  std::size_t d = 0;
};

// N (ad - bc)^2 / ((a+b)(c+d)(a+c)(b+d)), no continuity correction; 0 when a
// marginal is empty.
double ChiSquare(const Contingency& table);

struct WordChiSquare {
  std::string word;
  double chi2 = 0;
  Contingency table;
};

struct LabeledTokens {
  std::vector<std::string> tokens;
  bool important = false;
};

// Top `top_k` tokens by chi-square, ties by token. kInvalidLabels when one
// class is empty.
std::vector<WordChiSquare> ChiSquareWords(std::span<const LabeledTokens> rows,
                                          std::size_t top_k);

// Top max(1, floor(percent * N / 100)) statements of each ranking are
// important, all others unimportant. kInvalidThreshold outside (0, 100].
std::map<StatementId, bool> LabelTopPercent(
    const std::map<PolicyId, Ranking>& rankings, double percent);

// statement_id,words,syllables,flesch,relative_rank
void WriteReadabilityCsv(std::ostream& os,
                         std::span<const ReadabilityScore> scores,
                         const std::map<PolicyId, Ranking>& rankings);
// word,chi2,a,b,c,d
void WriteChiSquareCsv(std::ostream& os, std::span<const WordChiSquare> rows);

}  // namespace tcrank

#endif  // TCRANK_TEXTSTATS_H_
