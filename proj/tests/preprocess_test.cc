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

#include "tcrank/preprocess.h"

#include <gtest/gtest.h>

#include <set>
#include <string>
#include <utility>
#include <vector>

namespace tcrank {
namespace {

using Tokens = std::vector<std::string>;

TEST(StopwordsTest, FrozenList) {
  const auto words = Stopwords();
  EXPECT_EQ(words.size(), 179u);
  EXPECT_EQ(std::set<std::string_view>(words.begin(), words.end()).size(), 179u);
  EXPECT_EQ(words.front(), "i");
  EXPECT_EQ(words.back(), "wouldn't");
  for (const char* w : {"the", "an", "and", "of", "over", "no", "not", "s", "t"}) {
    EXPECT_TRUE(IsStopword(w)) << w;
  }
  for (const char* w : {"fee", "refund", "cat", "terms", "The"}) {
    EXPECT_FALSE(IsStopword(w)) << w;
  }
}

// Reference vocabulary from the original algorithm description and the
// reference implementation's test set.
TEST(PorterStemTest, ReferenceWords) {
  const std::vector<std::pair<const char*, const char*>> cases = {
      {"caresses", "caress"}, {"ponies", "poni"}, {"ties", "ti"},
      {"caress", "caress"}, {"cats", "cat"}, {"feed", "feed"},
      {"agreed", "agre"}, {"plastered", "plaster"}, {"bled", "bled"},
      {"motoring", "motor"}, {"sing", "sing"}, {"conflated", "conflat"},
      {"troubled", "troubl"}, {"sized", "size"}, {"hopping", "hop"},
      {"tanned", "tan"}, {"falling", "fall"}, {"hissing", "hiss"},
      {"fizzed", "fizz"}, {"failing", "fail"}, {"filing", "file"},
      {"happy", "happi"}, {"sky", "sky"}, {"relational", "relat"},
      {"conditional", "condit"}, {"rational", "ration"},
      {"valenci", "valenc"}, {"hesitanci", "hesit"}, {"digitizer", "digit"},
      {"conformabli", "conform"}, {"radicalli", "radic"},
      {"differentli", "differ"}, {"vileli", "vile"},
      {"analogousli", "analog"}, {"vietnamization", "vietnam"},
      {"predication", "predic"}, {"operator", "oper"},
      {"feudalism", "feudal"}, {"decisiveness", "decis"},
      {"hopefulness", "hope"}, {"callousness", "callous"},
      {"formaliti", "formal"}, {"sensitiviti", "sensit"},
      {"sensibiliti", "sensibl"}, {"triplicate", "triplic"},
      {"formative", "form"}, {"formalize", "formal"},
      {"electriciti", "electr"}, {"electrical", "electr"},
      {"hopeful", "hope"}, {"goodness", "good"}, {"revival", "reviv"},
      {"allowance", "allow"}, {"inference", "infer"}, {"airliner", "airlin"},
      {"gyroscopic", "gyroscop"}, {"adjustable", "adjust"},
      {"defensible", "defens"}, {"irritant", "irrit"},
      {"replacement", "replac"}, {"adjustment", "adjust"},
      {"dependent", "depend"}, {"adoption", "adopt"},
      {"homologou", "homolog"}, {"communism", "commun"},
      {"activate", "activ"}, {"angulariti", "angular"},
      {"homologous", "homolog"}, {"effective", "effect"},
      {"bowdlerize", "bowdler"}, {"probate", "probat"}, {"rate", "rate"},
      {"cease", "ceas"}, {"controll", "control"}, {"roll", "roll"},
      {"generalizations", "gener"}, {"oscillators", "oscil"},
      {"returned", "return"}, {"mouthpieces", "mouthpiec"},
      {"sanitization", "sanit"}, {"incur", "incur"}, {"fee", "fee"},
      {"is", "is"}, {"a", "a"}};
  for (const auto& [word, stem] : cases) EXPECT_EQ(PorterStem(word), stem) << word;
}

TEST(PreprocessTest, Examples) {
  EXPECT_EQ(Preprocess("The Cat, sat!"), (Tokens{"cat", "sat"}));
  EXPECT_TRUE(Preprocess("").empty());
  EXPECT_TRUE(Preprocess("  the and of  ").empty());
  EXPECT_EQ(Preprocess("Returned mouthpieces over $300 incur an $8.00 sanitization fee"),
            (Tokens{"return", "mouthpiec", "300", "incur", "8", "00", "sanit", "fee"}));
}

TEST(PreprocessTest, TokensAreClean) {
  const auto tokens = Preprocess(
      "We'll NOT refund: shipping-fees, e.g. \"handling\" (non-refundable); "
      "caf\xc3\xa9 orders\ttoo.");
  EXPECT_FALSE(tokens.empty());
  for (const auto& t : tokens) {
    EXPECT_FALSE(t.empty());
    EXPECT_FALSE(IsStopword(t)) << t;
    for (char c : t) {
      EXPECT_TRUE((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) << t;
    }
  }
  EXPECT_EQ(Preprocess("Refunds refunded REFUNDING"), (Tokens{"refund", "refund", "refund"}));
}

}  // namespace
}  // namespace tcrank
