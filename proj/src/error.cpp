// Copyright 2026 The pdmp Authors
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

#include "pdmp/error.hpp"

namespace pdmp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidTopology: return "invalid-topology";
    case ErrorCode::kConstructionFailure: return "construction-failure";
    case ErrorCode::kAssumptionViolation: return "assumption-violation";
    case ErrorCode::kInvalidObjective: return "invalid-objective";
    case ErrorCode::kInvalidPartition: return "invalid-partition";
    case ErrorCode::kParseError: return "parse-error";
    case ErrorCode::kUnsupportedDataset: return "unsupported-dataset";
    case ErrorCode::kStepsizeViolation: return "stepsize-violation";
    case ErrorCode::kInvalidInput: return "invalid-input";
    case ErrorCode::kDegenerateConfiguration: return "degenerate-configuration";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kInvalidEta: return "invalid-eta";
    case ErrorCode::kCertificationFailure: return "certification-failure";
    case ErrorCode::kInnerSolveFailure: return "inner-solve-failure";
    case ErrorCode::kReferenceFailure: return "reference-failure";
    case ErrorCode::kConfigError: return "config-error";
    case ErrorCode::kIoError: return "io-error";
  }
  return "unknown-error";
}

}  // namespace pdmp
