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

#include "polexam/error.hpp"

namespace polexam {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kModelInvalid: return "model_invalid";
    case ErrorCode::kIndex: return "index";
    case ErrorCode::kImpossibleObservation: return "impossible_observation";
    case ErrorCode::kTerminalState: return "terminal_state";
    case ErrorCode::kIncompatible: return "incompatible";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kShape: return "shape";
    case ErrorCode::kNumeric: return "numeric";
    case ErrorCode::kTrainingAborted: return "training_aborted";
    case ErrorCode::kLoad: return "load";
    case ErrorCode::kIngest: return "ingest";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kEmptyInput: return "empty_input";
    case ErrorCode::kFinished: return "finished";
    case ErrorCode::kPrecondition: return "precondition";
    case ErrorCode::kRange: return "range";
    case ErrorCode::kCapacity: return "capacity";
    case ErrorCode::kIo: return "io";
  }
  return "internal";
}

}  // namespace polexam
