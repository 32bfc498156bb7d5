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

// Policy ingestion: sentence segmentation of terms-and-conditions text and
// the statement store.
//
// Segmentation rules, applied to the raw text:
//
//   1. The text is cut into blocks at blank lines and at lines that start
//      with a list marker ("-", "*", "•", "1.", "2)", "(3)", "a)", "(iv)").
//      The marker itself is dropped. Other newlines are plain whitespace.
//   2. Whitespace runs are collapsed to a single space.
//   3. Inside a block, a run of '.', '!' or '?' (plus trailing closing quotes
//      or brackets) ends a sentence when followed by whitespace or the end of
//      the block. A lone '.' does not end a sentence when the word before it
//      is a known abbreviation ("Inc", "e.g", ...), a dotted letter chain
//      ("U.S", "P.O"), or a single capital letter used as an initial (next to
//      another initial, or after a capitalized word). Decimal points never
//      end a sentence because no whitespace follows them.
//   4. Trailing text without a terminator becomes its own statement.

#ifndef TCRANK_CORPUS_H_
#define TCRANK_CORPUS_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tcrank/ids.h"
#include "tcrank/stats.h"

namespace tcrank {

struct Statement {
  StatementId id;
  PolicyId policy_id;
  std::size_t index = 0;
  std::string text;
  std::size_t word_count = 0;
  // Byte offset of `text` inside NormalizeWhitespace(raw_text).
  std::size_t offset = 0;
};

struct PolicyDocument {
  PolicyId policy_id;
  std::string source_url;
  std::string raw_text;
  std::vector<Statement> statements;
};

// "<policy>#0007". Zero padding keeps lexicographic order equal to position
// order for policies of up to 10,000 statements.
StatementId MakeStatementId(const PolicyId& policy, std::size_t index);

std::string NormalizeWhitespace(std::string_view text);
std::size_t CountWords(std::string_view text);

// Sentences of `text` under the rules above. Never throws; may be empty.
std::vector<std::string> SplitSentences(std::string_view text);

// Throws kInvalidDocument for empty or whitespace-only text.
PolicyDocument SegmentPolicy(PolicyId policy_id, std::string source_url,
                             std::string raw_text);

// Five-number summary of statement word counts; kInvalidDocument when the
// document has no statements.
FiveNumberSummary StatementLengthSummary(const PolicyDocument& doc);

// Policy input: JSON {policy_id, source_url, raw_text}.
PolicyDocument ParsePolicyJson(std::string_view json);

// Statement store: JSON list of {statement_id, policy_id, index, text}.
std::string StatementStoreToJson(std::span<const Statement> statements);
std::vector<Statement> StatementStoreFromJson(std::string_view json);

}  // namespace tcrank

#endif  // TCRANK_CORPUS_H_
