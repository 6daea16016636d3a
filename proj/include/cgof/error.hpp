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

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cgof {

enum class ErrorKind {
  invalid_argument,
  invalid_parameter,
  model_evaluation,
  insufficient_data,
  empty_cell,
  singular_design,
  degenerate_fit,
  invalid_start,
  convergence_failure,
  singular_information,
  covariance_construction,
  invalid_df,
  data_error,
  experiment_invalid,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Broad category used by the C API and the CLI exit status.
enum class ErrorCategory { usage, data, computation };

ErrorCategory category_of(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Estimation failures carry the last iterate (or the partial estimate) so
// callers can inspect where the optimizer stopped.
class EstimationError : public Error {
 public:
  EstimationError(ErrorKind kind, const std::string& what, std::vector<double> last)
      : Error(kind, what), last_(std::move(last)) {}

  const std::vector<double>& last_iterate() const noexcept { return last_; }

 private:
  std::vector<double> last_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace cgof
