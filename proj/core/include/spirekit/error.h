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

#ifndef SPIREKIT_ERROR_H_
#define SPIREKIT_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace spirekit {

enum class ErrorCode {
  kInvalidArgument,
  kParseError,
  kIoError,
  kEmptyDataset,
  kDegenerateDistribution,
  kHeterogeneousPairs,
  kUnknownPair,
  kWrongSetting,
  kDegenerateSplit,
  kNoFeasibleDelta,
  kInvalidFactor,
  kPoolExhausted,
  kEmptySplit,
  kDegenerateLabels,
  kInvalidTransform,
  kNonTerminating,
  kTooFewSegments,
  kIncompleteLabeling,
  kMissingReferences,
  kInfeasibleJoint,
  kDivergence,
  kIncompleteSweep,
};

std::string_view ErrorCodeName(ErrorCode code);

// True for errors that describe a well-formed input with no solution
// (as opposed to malformed input). The CLI maps these to exit code 2.
bool IsInfeasible(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace spirekit

#endif  // SPIREKIT_ERROR_H_
