/*
 * Copyright (c) The cntcard Authors.
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cntcard {

/// Failure categories. The CLI prints the category name as the first token of
/// its one-line error message, so the names are part of the external surface.
enum class ErrorKind {
  kConfig,
  kSchema,
  kQuery,
  kContainmentDomain,
  kFeaturization,
  kShape,
  kNumeric,
  kTraining,
  kEmptyPerturbation,
  kIo,
};

std::string_view errorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const {
    return kind_;
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void check(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) {
    fail(kind, message);
  }
}

} // namespace cntcard
