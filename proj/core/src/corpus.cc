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

#include "tcrank/corpus.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>

#include "json.hpp"
#include "tcrank/error.h"

namespace tcrank {
namespace {

bool IsSpace(char c) { return std::isspace(static_cast<unsigned char>(c)); }
bool IsUpper(char c) { return std::isupper(static_cast<unsigned char>(c)); }
bool IsLower(char c) { return std::islower(static_cast<unsigned char>(c)); }
bool IsAlpha(char c) { return std::isalpha(static_cast<unsigned char>(c)); }
bool IsDigit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }
bool IsTerminator(char c) { return c == '.' || c == '!' || c == '?'; }

bool IsCloser(std::string_view s, std::size_t i, std::size_t* width) {
  static constexpr std::array<std::string_view, 6> kMultiByte = {
      "\xE2\x80\x9D", "\xE2\x80\x99", "\xC2\xBB",  // ” ’ »
      "\xE2\x80\xBA", "\xE3\x80\x8D", "\xE3\x80\x8F"};
  const char c = s[i];
  if (c == ')' || c == ']' || c == '}' || c == '"' || c == '\'') {
    *width = 1;
    return true;
  }
  for (std::string_view m : kMultiByte) {
    if (s.substr(i, m.size()) == m) {
      *width = m.size();
      return true;
    }
  }
  return false;
}

// Abbreviations compared case-insensitively, without the trailing period.
// "no", "etc", "co" and "st" are also ordinary words and only guard a period
// when the next word starts with a lowercase letter or digit.
constexpr std::array<std::string_view, 30> kAbbreviations = {
    "e.g", "i.e", "p.o", "inc", "ltd", "co",   "corp", "u.s", "u.k",  "mr",
    "mrs", "ms",  "dr",  "st",  "jr",  "sr",   "vs",   "approx", "dept", "fig",
    "no",  "jan", "feb", "aug", "sept", "oct", "nov",  "dec", "ave",  "etc"};

bool EqualsIgnoreCase(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

bool IsDottedChain(std::string_view token) {
  // [A-Za-z](\.[A-Za-z])+
  if (token.size() < 3 || token.size() % 2 == 0) return false;
  for (std::size_t i = 0; i < token.size(); ++i) {
    if (i % 2 == 0 ? !IsAlpha(token[i]) : token[i] != '.') return false;
  }
  return true;
}

bool IsInitial(std::string_view token) {
  return token.size() == 2 && IsUpper(token[0]) && token[1] == '.';
}

std::string_view StripOpeners(std::string_view token) {
  while (!token.empty() && (token.front() == '(' || token.front() == '[' ||
                            token.front() == '"' || token.front() == '\'')) {
    token.remove_prefix(1);
  }
  return token;
}

// Whitespace-delimited token ending just before `end` (exclusive).
std::string_view TokenBefore(std::string_view s, std::size_t end) {
  std::size_t begin = end;
  while (begin > 0 && !IsSpace(s[begin - 1])) --begin;
  return s.substr(begin, end - begin);
}

std::string_view TokenAt(std::string_view s, std::size_t begin) {
  while (begin < s.size() && IsSpace(s[begin])) ++begin;
  std::size_t end = begin;
  while (end < s.size() && !IsSpace(s[end])) ++end;
  return s.substr(begin, end - begin);
}

// Decides whether the lone period at `dot` ends a sentence. `after` is the
// index just past the terminator run (and closers).
bool PeriodEndsSentence(std::string_view s, std::size_t dot,
                        std::size_t after) {
  const std::string_view token = StripOpeners(TokenBefore(s, dot));
  if (token.empty()) return true;
  const std::string_view next = TokenAt(s, after);
  const bool next_continues =
      !next.empty() && (IsLower(next.front()) || IsDigit(next.front()));

  for (std::string_view abbr : kAbbreviations) {
    if (!EqualsIgnoreCase(token, abbr)) continue;
    if (abbr == "no" || abbr == "etc" || abbr == "co" || abbr == "st") {
      // Ordinary words too; only guard when the sentence visibly continues.
      return !next_continues;
    }
    return false;
  }
  if (IsDottedChain(token)) return false;

  if (token.size() == 1 && IsUpper(token.front())) {
    if (IsInitial(next)) return false;
    const std::size_t token_begin = dot - token.size();
    std::size_t prev_end = token_begin;
    while (prev_end > 0 && IsSpace(s[prev_end - 1])) --prev_end;
    const std::string_view prev = TokenBefore(s, prev_end);
    if (!prev.empty()) {
      if (IsInitial(prev)) return false;
      if (IsUpper(prev.front()) && !IsTerminator(prev.back())) return false;
    }
  }
  return true;
}

void SplitBlock(std::string_view block, std::vector<std::string>& out) {
  const std::string normalized = NormalizeWhitespace(block);
  const std::string_view s = normalized;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!IsTerminator(s[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && IsTerminator(s[j])) ++j;
    const bool lone_period = (j == i + 1 && s[i] == '.');
    std::size_t width = 0;
    while (j < s.size() && IsCloser(s, j, &width)) j += width;
    const bool at_boundary = (j == s.size() || IsSpace(s[j]));
    if (at_boundary && (!lone_period || PeriodEndsSentence(s, i, j))) {
      out.emplace_back(s.substr(start, j - start));
      start = j;
      while (start < s.size() && IsSpace(s[start])) ++start;
    }
    i = j;
  }
  if (start < s.size()) out.emplace_back(s.substr(start));
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && IsSpace(s.front())) s.remove_prefix(1);
  while (!s.empty() && IsSpace(s.back())) s.remove_suffix(1);
  return s;
}

// Length of a leading list marker including the whitespace after it, or 0.
std::size_t ListMarkerLength(std::string_view line) {
  static constexpr std::array<std::string_view, 10> kBullets = {
      "-", "*", "+", "\xE2\x80\xA2", "\xC2\xB7", "\xE2\x96\xAA",
      "\xE2\x97\x8F", "\xE2\x97\xA6", "\xE2\x80\xA3", "\xE2\x80\x93"};
  auto followed_by_space = [&](std::size_t n) -> std::size_t {
    if (n < line.size() && IsSpace(line[n])) {
      while (n < line.size() && IsSpace(line[n])) ++n;
      return n;
    }
    return 0;
  };
  for (std::string_view b : kBullets) {
    if (line.starts_with(b)) return followed_by_space(b.size());
  }
  std::size_t n = 0;
  if (!line.empty() && line[0] == '(') {
    // (3) (a) (iv)
    std::size_t k = 1;
    while (k < line.size() && k <= 5 &&
           std::isalnum(static_cast<unsigned char>(line[k]))) {
      ++k;
    }
    if (k > 1 && k < line.size() && line[k] == ')') {
      const std::string_view inner = line.substr(1, k - 1);
      const bool numeric = std::all_of(inner.begin(), inner.end(), IsDigit);
      const bool roman = std::all_of(inner.begin(), inner.end(), [](char c) {
        return std::string_view("ivxlIVXL").find(c) != std::string_view::npos;
      });
      if (numeric || roman || (inner.size() == 1 && IsAlpha(inner[0]))) {
        return followed_by_space(k + 1);
      }
    }
    return 0;
  }
  while (n < line.size() && n < 3 && IsDigit(line[n])) ++n;
  if (n > 0 && n < line.size() && (line[n] == '.' || line[n] == ')')) {
    return followed_by_space(n + 1);
  }
  if (line.size() > 1 && IsLower(line[0]) && line[1] == ')') {
    return followed_by_space(2);
  }
  return 0;
}

}  // namespace

StatementId MakeStatementId(const PolicyId& policy, std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04zu", index);
  return StatementId(policy.str() + "#" + buf);
}

std::string NormalizeWhitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (IsSpace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

std::size_t CountWords(std::string_view text) {
  std::size_t count = 0;
  bool in_word = false;
  for (char c : text) {
    if (IsSpace(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++count;
    }
  }
  return count;
}

std::vector<std::string> SplitSentences(std::string_view text) {
  std::vector<std::string> sentences;
  std::string block;
  auto flush = [&] {
    SplitBlock(block, sentences);
    block.clear();
  };
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = Trim(text.substr(pos, eol - pos));
    if (line.empty()) {
      flush();
    } else if (const std::size_t marker = ListMarkerLength(line); marker > 0) {
      flush();
      block.assign(line.substr(marker));
    } else {
      if (!block.empty()) block += ' ';
      block += line;
    }
    pos = eol + 1;
  }
  flush();
  return sentences;
}

PolicyDocument SegmentPolicy(PolicyId policy_id, std::string source_url,
                             std::string raw_text) {
  const std::string normalized = NormalizeWhitespace(raw_text);
  if (normalized.empty()) {
    throw Error(ErrorCode::kInvalidDocument,
                "policy '" + policy_id.str() + "' has no text");
  }
  PolicyDocument doc;
  doc.policy_id = std::move(policy_id);
  doc.source_url = std::move(source_url);
  std::size_t cursor = 0;
  for (std::string& text : SplitSentences(raw_text)) {
    Statement st;
    st.policy_id = doc.policy_id;
    st.index = doc.statements.size();
    st.id = MakeStatementId(doc.policy_id, st.index);
    st.word_count = CountWords(text);
    const std::size_t found = normalized.find(text, cursor);
    st.offset = found == std::string::npos ? cursor : found;
    cursor = st.offset + text.size();
    st.text = std::move(text);
    doc.statements.push_back(std::move(st));
  }
  doc.raw_text = std::move(raw_text);
  return doc;
}

FiveNumberSummary StatementLengthSummary(const PolicyDocument& doc) {
  if (doc.statements.empty()) {
    throw Error(ErrorCode::kInvalidDocument, "document has no statements");
  }
  std::vector<double> counts;
  counts.reserve(doc.statements.size());
  for (const Statement& st : doc.statements) {
    counts.push_back(static_cast<double>(st.word_count));
  }
  return Summarize(counts);
}

PolicyDocument ParsePolicyJson(std::string_view json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  if (!j.is_object() || !j.contains("policy_id") || !j.contains("raw_text")) {
    throw Error(ErrorCode::kParseError,
                "policy JSON needs policy_id and raw_text");
  }
  try {
    return SegmentPolicy(PolicyId(j.at("policy_id").get<std::string>()),
                         j.value("source_url", std::string()),
                         j.at("raw_text").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
}

std::string StatementStoreToJson(std::span<const Statement> statements) {
  nlohmann::json out = nlohmann::json::array();
  for (const Statement& st : statements) {
    out.push_back({{"statement_id", st.id.str()},
                   {"policy_id", st.policy_id.str()},
                   {"index", st.index},
                   {"text", st.text}});
  }
  return out.dump(2);
}

std::vector<Statement> StatementStoreFromJson(std::string_view json) {
  std::vector<Statement> out;
  try {
    for (const auto& item : nlohmann::json::parse(json)) {
      Statement st;
      st.id = StatementId(item.at("statement_id").get<std::string>());
      st.policy_id = PolicyId(item.at("policy_id").get<std::string>());
      st.index = item.at("index").get<std::size_t>();
      st.text = item.at("text").get<std::string>();
      st.word_count = CountWords(st.text);
      out.push_back(std::move(st));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  return out;
}

}  // namespace tcrank
