/*
 * Copyright 2026 The spirekit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "spirekit/error.h"

#include <string>

namespace spirekit {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kDegenerateDistribution: return "DegenerateDistribution";
    case ErrorCode::kHeterogeneousPairs: return "HeterogeneousPairs";
    case ErrorCode::kUnknownPair: return "UnknownPair";
    case ErrorCode::kWrongSetting: return "WrongSetting";
    case ErrorCode::kDegenerateSplit: return "DegenerateSplit";
    case ErrorCode::kNoFeasibleDelta: return "NoFeasibleDelta";
    case ErrorCode::kInvalidFactor: return "InvalidFactor";
    case ErrorCode::kPoolExhausted: return "PoolExhausted";
    case ErrorCode::kEmptySplit: return "EmptySplit";
    case ErrorCode::kDegenerateLabels: return "DegenerateLabels";
    case ErrorCode::kInvalidTransform: return "InvalidTransform";
    case ErrorCode::kNonTerminating: return "NonTerminating";
    case ErrorCode::kTooFewSegments: return "TooFewSegments";
    case ErrorCode::kIncompleteLabeling: return "IncompleteLabeling";
    case ErrorCode::kMissingReferences: return "MissingReferences";
    case ErrorCode::kInfeasibleJoint: return "InfeasibleJoint";
    case ErrorCode::kDivergence: return "Divergence";
    case ErrorCode::kIncompleteSweep: return "IncompleteSweep";
  }
  return "Unknown";
}

bool IsInfeasible(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNoFeasibleDelta:
    case ErrorCode::kInfeasibleJoint:
    case ErrorCode::kNonTerminating:
    case ErrorCode::kDivergence:
    case ErrorCode::kPoolExhausted:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code) {}

}  // namespace spirekit
