/*
 * Copyright 2026 The polexam Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef POLEXAM_ERROR_HPP_
#define POLEXAM_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace polexam {

/// Machine-readable failure category shared by every module. The API layer
/// maps each value to exactly one stable wire code and HTTP status.
enum class ErrorCode {
  kModelInvalid,
  kIndex,
  kImpossibleObservation,
  kTerminalState,
  kIncompatible,
  kConfig,
  kShape,
  kNumeric,
  kTrainingAborted,
  kLoad,
  kIngest,
  kNotFound,
  kConflict,
  kValidation,
  kEmptyInput,
  kFinished,
  kPrecondition,
  kRange,
  kCapacity,
  kIo,
};

/// Stable snake_case code string, e.g. "not_found".
std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace polexam

#endif  // POLEXAM_ERROR_HPP_
