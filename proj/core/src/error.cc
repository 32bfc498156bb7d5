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

#include "tcrank/error.h"

namespace tcrank {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidDocument: return "InvalidDocument";
    case ErrorCode::kNotEnoughStatements: return "NotEnoughStatements";
    case ErrorCode::kCoverageInfeasible: return "CoverageInfeasible";
    case ErrorCode::kInvalidChoice: return "InvalidChoice";
    case ErrorCode::kIncompleteComparison: return "IncompleteComparison";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kNoData: return "NoData";
    case ErrorCode::kUnknownStatement: return "UnknownStatement";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kInvalidLabels: return "InvalidLabels";
    case ErrorCode::kInvalidThreshold: return "InvalidThreshold";
    case ErrorCode::kDegenerateTrainingSet: return "DegenerateTrainingSet";
    case ErrorCode::kNoTaskAvailable: return "NoTaskAvailable";
    case ErrorCode::kUnknownWorker: return "UnknownWorker";
    case ErrorCode::kUnqualifiedWorker: return "UnqualifiedWorker";
    case ErrorCode::kStaleAssignment: return "StaleAssignment";
    case ErrorCode::kConflictingResubmission: return "ConflictingResubmission";
    case ErrorCode::kUnknownPolicy: return "UnknownPolicy";
    case ErrorCode::kUnknownHit: return "UnknownHit";
    case ErrorCode::kInsufficientWorkers: return "InsufficientWorkers";
    case ErrorCode::kInvalidState: return "InvalidState";
    case ErrorCode::kAlreadyExists: return "AlreadyExists";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace tcrank
