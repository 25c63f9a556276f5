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

// Multi-step experiments shared by the command-line tool and the acceptance
// runner.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cntcard/evalharness.h"
#include "cntcard/qgen.h"
#include "cntcard/relstore.h"

namespace cntcard {

/// Every table gets defaultRows unless overridden by name.
std::map<std::string, std::size_t> rowCountsFor(
    const Schema& schema,
    std::size_t defaultRows,
    const std::map<std::string, std::size_t>& overrides = {});

struct RoundTripReport {
  CardinalityEvaluation eval;
  /// Queries answered from at least one pool record.
  std::size_t applicable = 0;
  /// Applicable queries whose q-error is within tolerance of 1.
  std::size_t exact = 0;
  double worstApplicableQError = 1.0;
};

/// Cnt2Crd(Crd2Cnt(exact cardinality)) over numQueries generated queries with
/// a pool of poolSize records that covers every FROM clause.
RoundTripReport roundTripCheck(
    const Database& db,
    const GenConfig& cfg,
    std::size_t numQueries,
    std::size_t poolSize,
    double tolerance);

} // namespace cntcard
