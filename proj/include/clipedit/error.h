// Copyright 2026 The ClipEdit Authors.
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

#ifndef CLIPEDIT_ERROR_H_
#define CLIPEDIT_ERROR_H_

#include <stdexcept>
#include <string>

namespace clipedit {

// Broad failure classes. The CLI maps kConfig/kValidation/kIo to exit code 2
// and kNumeric to exit code 3.
enum class ErrorCode {
  kConfig,
  kValidation,
  kIo,
  kNumeric,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline Error ConfigError(const std::string& message) {
  return Error(ErrorCode::kConfig, message);
}
inline Error ValidationError(const std::string& message) {
  return Error(ErrorCode::kValidation, message);
}
inline Error IoError(const std::string& message) {
  return Error(ErrorCode::kIo, message);
}
inline Error NumericError(const std::string& message) {
  return Error(ErrorCode::kNumeric, message);
}

}  // namespace clipedit

#endif  // CLIPEDIT_ERROR_H_
