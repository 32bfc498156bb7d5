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

// Soft-margin kernel SVM trained by sequential minimal optimization.

#ifndef TCRANK_SVM_H_
#define TCRANK_SVM_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tcrank {

enum class KernelType { kLinear, kRbf };

std::string_view KernelName(KernelType kernel);
// "linear" or "rbf"; kInvalidInput otherwise.
KernelType ParseKernel(std::string_view name);

// Linear: <x, y>. RBF: exp(-gamma * |x - y|^2).
double KernelValue(KernelType kernel, double gamma, std::span<const double> x,
                   std::span<const double> y);

// Row-major dense square matrix.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * n_ + j];
  }
  const double* row(std::size_t i) const { return data_.data() + i * n_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

SquareMatrix GramMatrix(KernelType kernel, double gamma,
                        std::span<const std::vector<double>> x);

// min 0.5 a'Qa - sum(a)  s.t.  0 <= a_i <= C, y'a = 0, Q_ij = y_i y_j K_ij.
// Working sets use second-order selection; stops when the maximal KKT
// violation drops below `tolerance`.
struct SmoSolution {
  std::vector<double> alpha;
  // Decision function is sum_i alpha_i y_i K(x_i, x) - rho.
  double rho = 0;
  double objective = 0;
  std::size_t iterations = 0;
  bool converged = false;
};

SmoSolution SolveSmo(const SquareMatrix& gram, std::span<const int> y,
                     double c, double tolerance = 1e-3,
                     std::size_t max_iterations = 0);

// 0.5 a'Qa - sum(a) for an arbitrary alpha.
double DualObjective(const SquareMatrix& gram, std::span<const int> y,
                     std::span<const double> alpha);

struct SvmParams {
  KernelType kernel = KernelType::kRbf;
  double c = 1.0;
  // Ignored by the linear kernel.
  double gamma = 0.01;
  double tolerance = 1e-3;
  // 0 selects max(10^7, 100 n).
  std::size_t max_iterations = 0;
};

struct TrainedSvm {
  SvmParams params;
  std::vector<std::vector<double>> support_vectors;
  // alpha_i * y_i for each support vector.
  std::vector<double> dual_coefficients;
  double bias = 0;
  std::uint64_t seed = 0;
  double dual_objective = 0;
  std::size_t iterations = 0;
  bool converged = false;

  double Decision(std::span<const double> x) const;
  // +1 (important) when the decision value is positive, otherwise -1.
  int Predict(std::span<const double> x) const {
    return Decision(x) > 0 ? 1 : -1;
  }
};

// Labels are +1 / -1. kDegenerateTrainingSet when only one label occurs;
// kInvalidInput on bad parameters or ragged rows. SMO is deterministic, so
// the seed is only recorded in the model metadata.
TrainedSvm TrainSvm(std::span<const std::vector<double>> x,
                    std::span<const int> y, const SvmParams& params,
                    std::uint64_t seed = 0);

// Trains on the rows `subset` of a precomputed Gram matrix over `x`.
TrainedSvm TrainSvmOnGram(const SquareMatrix& gram,
                          std::span<const std::vector<double>> x,
                          std::span<const int> y,
                          std::span<const std::size_t> subset,
                          const SvmParams& params, std::uint64_t seed = 0);

std::string SvmToJson(const TrainedSvm& model);
TrainedSvm SvmFromJson(std::string_view json);

}  // namespace tcrank

#endif  // TCRANK_SVM_H_
