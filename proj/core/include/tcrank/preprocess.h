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

#ifndef TCRANK_PREPROCESS_H_
#define TCRANK_PREPROCESS_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tcrank {

// Bumped whenever the stopword list or stemmer rules change; stored in model
// files so that predictions use the pipeline the model was trained with.
inline constexpr std::string_view kPreprocessingVersion = "porter1980-stop179-v1";

// The bundled English stopword list, in its original order.
std::span<const std::string_view> Stopwords();
bool IsStopword(std::string_view word);

// Porter (1980) suffix-stripping stemmer. Expects a lowercase ASCII word;
// words of length <= 2 are returned unchanged.
std::string PorterStem(std::string_view word);

// lowercase -> punctuation to spaces -> whitespace tokens -> drop stopwords
// -> Porter stem -> drop stems that are stopwords. Any byte that is not an
// ASCII letter or digit counts as punctuation.
std::vector<std::string> Preprocess(std::string_view text);

}  // namespace tcrank

#endif  // TCRANK_PREPROCESS_H_
