/*
 * Copyright (c) 2026 The cgof Authors. All Rights Reserved
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cgof/error.hpp"

namespace cgof {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::invalid_parameter: return "invalid_parameter";
    case ErrorKind::model_evaluation: return "model_evaluation";
    case ErrorKind::insufficient_data: return "insufficient_data";
    case ErrorKind::empty_cell: return "empty_cell";
    case ErrorKind::singular_design: return "singular_design";
    case ErrorKind::degenerate_fit: return "degenerate_fit";
    case ErrorKind::invalid_start: return "invalid_start";
    case ErrorKind::convergence_failure: return "convergence_failure";
    case ErrorKind::singular_information: return "singular_information";
    case ErrorKind::covariance_construction: return "covariance_construction";
    case ErrorKind::invalid_df: return "invalid_df";
    case ErrorKind::data_error: return "data_error";
    case ErrorKind::experiment_invalid: return "experiment_invalid";
  }
  return "unknown";
}

ErrorCategory category_of(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument:
      return ErrorCategory::usage;
    case ErrorKind::data_error:
    case ErrorKind::insufficient_data:
      return ErrorCategory::data;
    default:
      return ErrorCategory::computation;
  }
}

}  // namespace cgof
