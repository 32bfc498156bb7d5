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

#include "tcrank/svm.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "json.hpp"
#include "tcrank/error.h"

namespace tcrank {
namespace {

constexpr double kTau = 1e-12;

void CheckParams(const SvmParams& p) {
  if (!(p.c > 0)) throw Error(ErrorCode::kInvalidInput, "C must be positive");
  if (p.kernel == KernelType::kRbf && !(p.gamma > 0)) {
    throw Error(ErrorCode::kInvalidInput, "gamma must be positive for RBF");
  }
  if (!(p.tolerance > 0)) {
    throw Error(ErrorCode::kInvalidInput, "tolerance must be positive");
  }
}

}  // namespace

std::string_view KernelName(KernelType kernel) {
  return kernel == KernelType::kLinear ? "linear" : "rbf";
}

KernelType ParseKernel(std::string_view name) {
  if (name == "linear") return KernelType::kLinear;
  if (name == "rbf") return KernelType::kRbf;
  throw Error(ErrorCode::kInvalidInput, "unknown kernel: " + std::string(name));
}

double KernelValue(KernelType kernel, double gamma, std::span<const double> x,
                   std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kInvalidInput, "kernel arguments differ in length");
  }
  if (kernel == KernelType::kLinear) {
    return std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
  }
  double d2 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

SquareMatrix GramMatrix(KernelType kernel, double gamma,
                        std::span<const std::vector<double>> x) {
  SquareMatrix k(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i; j < x.size(); ++j) {
      k(i, j) = k(j, i) = KernelValue(kernel, gamma, x[i], x[j]);
    }
  }
  return k;
}

double DualObjective(const SquareMatrix& gram, std::span<const int> y,
                     std::span<const double> alpha) {
  const std::size_t n = alpha.size();
  double quad = 0, lin = 0;
  for (std::size_t i = 0; i < n; ++i) {
    lin += alpha[i];
    if (alpha[i] == 0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      quad += alpha[i] * alpha[j] * y[i] * y[j] * gram(i, j);
    }
  }
  return 0.5 * quad - lin;
}

SmoSolution SolveSmo(const SquareMatrix& gram, std::span<const int> y,
                     double c, double tolerance, std::size_t max_iterations) {
  const std::size_t n = y.size();
  if (gram.size() != n) {
    throw Error(ErrorCode::kInvalidInput, "Gram matrix and labels differ in size");
  }
  if (max_iterations == 0) max_iterations = std::max<std::size_t>(10'000'000, 100 * n);

  SmoSolution sol;
  sol.alpha.assign(n, 0.0);
  auto& alpha = sol.alpha;
  // Gradient of the dual objective: G = Q alpha - 1.
  std::vector<double> grad(n, -1.0);
  auto q = [&](std::size_t i, std::size_t j) {
    return static_cast<double>(y[i] * y[j]) * gram(i, j);
  };

  while (sol.iterations < max_iterations) {
    // i maximizes -y_t G_t over I_up.
    double gmax = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t i = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] == 1) {
        if (alpha[t] < c && -grad[t] >= gmax) {
          gmax = -grad[t];
          i = static_cast<std::ptrdiff_t>(t);
        }
      } else if (alpha[t] > 0 && grad[t] >= gmax) {
        gmax = grad[t];
        i = static_cast<std::ptrdiff_t>(t);
      }
    }
    // j minimizes the second-order objective decrease over I_low.
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t j = -1;
    double best = std::numeric_limits<double>::infinity();
    if (i >= 0) {
      const auto ui = static_cast<std::size_t>(i);
      for (std::size_t t = 0; t < n; ++t) {
        double grad_diff;
        if (y[t] == 1) {
          if (!(alpha[t] > 0)) continue;
          gmax2 = std::max(gmax2, grad[t]);
          grad_diff = gmax + grad[t];
        } else {
          if (!(alpha[t] < c)) continue;
          gmax2 = std::max(gmax2, -grad[t]);
          grad_diff = gmax - grad[t];
        }
        if (grad_diff <= 0) continue;
        double quad = gram(ui, ui) + gram(t, t) - 2.0 * gram(ui, t);
        if (quad <= 0) quad = kTau;
        const double obj = -(grad_diff * grad_diff) / quad;
        if (obj <= best) {
          best = obj;
          j = static_cast<std::ptrdiff_t>(t);
        }
      }
    }
    if (i < 0 || j < 0 || gmax + gmax2 < tolerance) {
      sol.converged = true;
      break;
    }
    ++sol.iterations;

    const auto ui = static_cast<std::size_t>(i);
    const auto uj = static_cast<std::size_t>(j);
    const double old_ai = alpha[ui], old_aj = alpha[uj];
    if (y[ui] != y[uj]) {
      double quad = gram(ui, ui) + gram(uj, uj) + 2.0 * q(ui, uj);
      if (quad <= 0) quad = kTau;
      const double delta = (-grad[ui] - grad[uj]) / quad;
      const double diff = alpha[ui] - alpha[uj];
      alpha[ui] += delta;
      alpha[uj] += delta;
      if (diff > 0) {
        if (alpha[uj] < 0) {
          alpha[uj] = 0;
          alpha[ui] = diff;
        }
      } else if (alpha[ui] < 0) {
        alpha[ui] = 0;
        alpha[uj] = -diff;
      }
      if (diff > 0) {
        if (alpha[ui] > c) {
          alpha[ui] = c;
          alpha[uj] = c - diff;
        }
      } else if (alpha[uj] > c) {
        alpha[uj] = c;
        alpha[ui] = c + diff;
      }
    } else {
      double quad = gram(ui, ui) + gram(uj, uj) - 2.0 * q(ui, uj);
      if (quad <= 0) quad = kTau;
      const double delta = (grad[ui] - grad[uj]) / quad;
      const double sum = alpha[ui] + alpha[uj];
      alpha[ui] -= delta;
      alpha[uj] += delta;
      if (sum > c) {
        if (alpha[ui] > c) {
          alpha[ui] = c;
          alpha[uj] = sum - c;
        }
      } else if (alpha[uj] < 0) {
        alpha[uj] = 0;
        alpha[ui] = sum;
      }
      if (sum > c) {
        if (alpha[uj] > c) {
          alpha[uj] = c;
          alpha[ui] = sum - c;
        }
      } else if (alpha[ui] < 0) {
        alpha[ui] = 0;
        alpha[uj] = sum;
      }
    }
    const double dai = alpha[ui] - old_ai, daj = alpha[uj] - old_aj;
    for (std::size_t t = 0; t < n; ++t) {
      grad[t] += q(ui, t) * dai + q(uj, t) * daj;
    }
  }

  // rho: average y_i G_i over free variables, else the midpoint of the
  // feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0;
  std::size_t free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= c) {
      if (y[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0) {
      if (y[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++free;
      sum_free += yg;
    }
  }
  sol.rho = free > 0 ? sum_free / static_cast<double>(free) : (ub + lb) / 2;
  double obj = 0;
  for (std::size_t t = 0; t < n; ++t) obj += alpha[t] * (grad[t] - 1.0);
  sol.objective = obj / 2;
  return sol;
}

double TrainedSvm::Decision(std::span<const double> x) const {
  double f = bias;
  for (std::size_t i = 0; i < support_vectors.size(); ++i) {
    f += dual_coefficients[i] *
         KernelValue(params.kernel, params.gamma, support_vectors[i], x);
  }
  return f;
}

TrainedSvm TrainSvmOnGram(const SquareMatrix& gram,
                          std::span<const std::vector<double>> x,
                          std::span<const int> y,
                          std::span<const std::size_t> subset,
                          const SvmParams& params, std::uint64_t seed) {
  CheckParams(params);
  if (x.size() != y.size() || gram.size() != x.size()) {
    throw Error(ErrorCode::kInvalidInput, "rows, labels and Gram matrix differ");
  }
  bool pos = false, neg = false;
  std::vector<int> sub_y;
  sub_y.reserve(subset.size());
  for (std::size_t s : subset) {
    if (y[s] != 1 && y[s] != -1) {
      throw Error(ErrorCode::kInvalidInput, "labels must be +1 or -1");
    }
    (y[s] == 1 ? pos : neg) = true;
    sub_y.push_back(y[s]);
  }
  if (!pos || !neg) {
    throw Error(ErrorCode::kDegenerateTrainingSet,
                "training rows carry a single label");
  }
  SquareMatrix sub(subset.size());
  for (std::size_t a = 0; a < subset.size(); ++a) {
    const double* row = gram.row(subset[a]);
    for (std::size_t b = 0; b < subset.size(); ++b) sub(a, b) = row[subset[b]];
  }
  const SmoSolution sol =
      SolveSmo(sub, sub_y, params.c, params.tolerance, params.max_iterations);

  TrainedSvm model;
  model.params = params;
  model.seed = seed;
  model.bias = -sol.rho;
  model.dual_objective = sol.objective;
  model.iterations = sol.iterations;
  model.converged = sol.converged;
  for (std::size_t a = 0; a < subset.size(); ++a) {
    if (sol.alpha[a] > 0) {
      model.support_vectors.push_back(x[subset[a]]);
      model.dual_coefficients.push_back(sol.alpha[a] * sub_y[a]);
    }
  }
  return model;
}

TrainedSvm TrainSvm(std::span<const std::vector<double>> x,
                    std::span<const int> y, const SvmParams& params,
                    std::uint64_t seed) {
  CheckParams(params);
  if (x.empty()) throw Error(ErrorCode::kEmptyInput, "no training rows");
  for (const auto& row : x) {
    if (row.size() != x.front().size()) {
      throw Error(ErrorCode::kInvalidInput, "training rows differ in length");
    }
  }
  std::vector<std::size_t> all(x.size());
  std::iota(all.begin(), all.end(), 0);
  return TrainSvmOnGram(GramMatrix(params.kernel, params.gamma, x), x, y, all,
                        params, seed);
}

std::string SvmToJson(const TrainedSvm& model) {
  nlohmann::json j;
  j["kernel"] = KernelName(model.params.kernel);
  j["C"] = model.params.c;
  j["gamma"] = model.params.gamma;
  j["tolerance"] = model.params.tolerance;
  j["bias"] = model.bias;
  j["seed"] = model.seed;
  j["dual_objective"] = model.dual_objective;
  j["iterations"] = model.iterations;
  j["converged"] = model.converged;
  j["support_vectors"] = model.support_vectors;
  j["dual_coefficients"] = model.dual_coefficients;
  return j.dump();
}

TrainedSvm SvmFromJson(std::string_view json) {
  try {
    const auto j = nlohmann::json::parse(json);
    TrainedSvm m;
    m.params.kernel = ParseKernel(j.at("kernel").get<std::string>());
    m.params.c = j.at("C").get<double>();
    m.params.gamma = j.at("gamma").get<double>();
    m.params.tolerance = j.value("tolerance", 1e-3);
    m.bias = j.at("bias").get<double>();
    m.seed = j.value("seed", std::uint64_t{0});
    m.dual_objective = j.value("dual_objective", 0.0);
    m.iterations = j.value("iterations", std::size_t{0});
    m.converged = j.value("converged", true);
    m.support_vectors =
        j.at("support_vectors").get<std::vector<std::vector<double>>>();
    m.dual_coefficients = j.at("dual_coefficients").get<std::vector<double>>();
    if (m.support_vectors.size() != m.dual_coefficients.size()) {
      throw Error(ErrorCode::kParseError,
                  "support vector and coefficient counts differ");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
}

}  // namespace tcrank
