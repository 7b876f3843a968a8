/*
 * Copyright 2026 The FedSim Authors.
 *
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

#ifndef FEDSIM_ERROR_H_
#define FEDSIM_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace fedsim {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kNonFinite,
  kFormat,
  kCapacity,
  kBudgetExhausted,
  kConfig,
  kIo,
};

std::string_view error_code_name(ErrorCode code);

// All library failures are reported through this exception type. The code
// lets callers (and tests) distinguish contract violations without parsing
// the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace fedsim

#endif  // FEDSIM_ERROR_H_
