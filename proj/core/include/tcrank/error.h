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

#ifndef TCRANK_ERROR_H_
#define TCRANK_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tcrank {

enum class ErrorCode {
  kInvalidDocument,
  kNotEnoughStatements,
  kCoverageInfeasible,
  kInvalidChoice,
  kIncompleteComparison,
  kEmptyInput,
  kNoData,
  kUnknownStatement,
  kInsufficientData,
  kInvalidInput,
  kInvalidLabels,
  kInvalidThreshold,
  kDegenerateTrainingSet,
  kNoTaskAvailable,
  kUnknownWorker,
  kUnqualifiedWorker,
  kStaleAssignment,
  kConflictingResubmission,
  kUnknownPolicy,
  kUnknownHit,
  kInsufficientWorkers,
  kInvalidState,
  kAlreadyExists,
  kParseError,
  kIoError,
};

// Stable name used in logs, HTTP error bodies and CLI messages.
std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported by throwing Error (or a subclass).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Raised when the requested sample size cannot cover every statement.
class CoverageInfeasibleError : public Error {
 public:
  CoverageInfeasibleError(std::size_t requested, std::size_t minimum)
      : Error(ErrorCode::kCoverageInfeasible,
              "requested " + std::to_string(requested) +
                  " pairs but covering all statements needs at least " +
                  std::to_string(minimum)),
        minimum_(minimum) {}

  std::size_t minimum_feasible() const { return minimum_; }

 private:
  std::size_t minimum_;
};

}  // namespace tcrank

#endif  // TCRANK_ERROR_H_
