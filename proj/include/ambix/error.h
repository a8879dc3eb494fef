// Copyright 2026 The Ambix Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef AMBIX_ERROR_H_
#define AMBIX_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace ambix {

enum class ErrorCode {
  kInvalidArgument,
  kUnsupportedOrder,
  kFormatError,
  kShapeError,
  kNumericalError,
  kStateError,
  kConfigError,
  kInternalError,
  kUndefinedReference,
  kIoError,
};

std::string_view ErrorCodeName(ErrorCode code);

// Single exception type for the library. The code identifies the failure
// class; the CLI maps it onto process exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void Require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) Fail(code, message);
}

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kUnsupportedOrder: return "unsupported-order";
    case ErrorCode::kFormatError: return "format-error";
    case ErrorCode::kShapeError: return "shape-error";
    case ErrorCode::kNumericalError: return "numerical-error";
    case ErrorCode::kStateError: return "state-error";
    case ErrorCode::kConfigError: return "config-error";
    case ErrorCode::kInternalError: return "internal-error";
    case ErrorCode::kUndefinedReference: return "undefined-reference";
    case ErrorCode::kIoError: return "io-error";
  }
  return "unknown";
}

}  // namespace ambix

#endif  // AMBIX_ERROR_H_
