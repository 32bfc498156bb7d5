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

#ifndef TCRANK_STATS_H_
#define TCRANK_STATS_H_

#include <cstddef>
#include <span>

namespace tcrank {

struct FiveNumberSummary {
  double min = 0;
  double q1 = 0;
  double median = 0;
  double q3 = 0;
  double max = 0;
};

// Quantile of an ascending-sorted sample using linear interpolation at the
// 1-based position q * (n + 1) (the "exclusive" rule), clamped to the sample
// range. Requires a non-empty sample and q in [0, 1].
double ExclusiveQuantile(std::span<const double> sorted, double q);

// Throws kEmptyInput on an empty sample. The input need not be sorted.
FiveNumberSummary Summarize(std::span<const double> values);

double Mean(std::span<const double> values);
// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double SampleStdDev(std::span<const double> values);

struct CorrelationResult {
  double coefficient = 0;
  double p_value = 1;
  std::size_t n = 0;
};

// Pearson product-moment correlation with a two-sided p-value from the
// t distribution on n - 2 degrees of freedom. Requires n >= 3 and equal
// lengths (kInsufficientData / kInvalidInput). A constant input yields r = 0
// and p = 1.
CorrelationResult Pearson(std::span<const double> x, std::span<const double> y);

// Two-sided tail probability of a standard normal deviate.
double TwoSidedNormalP(double z);

}  // namespace tcrank

#endif  // TCRANK_STATS_H_
