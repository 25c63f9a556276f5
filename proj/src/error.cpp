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

#include "cntcard/error.h"

namespace cntcard {

std::string_view errorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
      return "config-error";
    case ErrorKind::kSchema:
      return "schema-error";
    case ErrorKind::kQuery:
      return "query-error";
    case ErrorKind::kContainmentDomain:
      return "containment-domain-error";
    case ErrorKind::kFeaturization:
      return "featurization-error";
    case ErrorKind::kShape:
      return "shape-error";
    case ErrorKind::kNumeric:
      return "numeric-error";
    case ErrorKind::kTraining:
      return "training-error";
    case ErrorKind::kEmptyPerturbation:
      return "empty-perturbation-error";
    case ErrorKind::kIo:
      return "io-error";
  }
  return "unknown-error";
}

void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

} // namespace cntcard
