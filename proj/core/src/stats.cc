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

#include "tcrank/stats.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "tcrank/error.h"

namespace tcrank {

double ExclusiveQuantile(std::span<const double> sorted, double q) {
  const std::size_t n = sorted.size();
  const double pos = std::clamp(q * static_cast<double>(n + 1), 1.0,
                                static_cast<double>(n));
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  if (lo >= n) return sorted[n - 1];
  return sorted[lo - 1] + frac * (sorted[lo] - sorted[lo - 1]);
}

FiveNumberSummary Summarize(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::kEmptyInput, "empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return {sorted.front(), ExclusiveQuantile(sorted, 0.25),
          ExclusiveQuantile(sorted, 0.5), ExclusiveQuantile(sorted, 0.75),
          sorted.back()};
}

double Mean(std::span<const double> values) {
  if (values.empty()) return 0;
  double sum = 0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double SampleStdDev(std::span<const double> values) {
  if (values.size() < 2) return 0;
  const double mean = Mean(values);
  double ss = 0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

CorrelationResult Pearson(std::span<const double> x,
                          std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kInvalidInput, "Pearson inputs differ in length");
  }
  const std::size_t n = x.size();
  if (n < 3) {
    throw Error(ErrorCode::kInsufficientData,
                "Pearson correlation needs at least 3 observations");
  }
  const double mx = Mean(x);
  const double my = Mean(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  CorrelationResult result;
  result.n = n;
  if (sxx == 0 || syy == 0) return result;
  const double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  result.coefficient = r;
  const double df = static_cast<double>(n - 2);
  if (std::abs(r) >= 1.0) {
    result.p_value = 0;
    return result;
  }
  const double t = r * std::sqrt(df / ((1.0 - r) * (1.0 + r)));
  boost::math::students_t dist(df);
  result.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  return result;
}

double TwoSidedNormalP(double z) {
  return std::erfc(std::abs(z) / std::numbers::sqrt2);
}

}  // namespace tcrank
