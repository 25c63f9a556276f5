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

#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "cntcard/estimators.h"
#include "cntcard/qgen.h"

namespace cntcard {

struct QErrorStats {
  double p50 = 1.0;
  double p75 = 1.0;
  double p90 = 1.0;
  double p95 = 1.0;
  double p99 = 1.0;
  double max = 1.0;
  double mean = 1.0;
  std::size_t count = 0;
};

/// Nearest rank: the ceil(p/100 * n)-th smallest value. p in (0, 100].
double percentile(std::span<const double> values, double p);

QErrorStats computeStats(std::span<const double> qerrors);

/// max(est, truth) / min(est, truth) with both sides floored at 1.
double cardinalityQError(double estimate, double truth);

struct JoinBreakdown {
  std::map<std::size_t, QErrorStats> byJoins;
};

struct ContainmentEvaluation {
  QErrorStats stats;
  JoinBreakdown breakdown;
  std::vector<double> qerrors;
};

/// Per-pair q-error with both the label and the estimate floored at labelFloor.
ContainmentEvaluation evalContainment(
    const ContainmentEstimator& model,
    std::span<const LabeledPair> workload,
    double labelFloor);

struct CardinalityEvaluation {
  QErrorStats stats;
  JoinBreakdown breakdown;
  std::vector<double> estimates;
  std::vector<double> qerrors;
};

CardinalityEvaluation evalCardinality(const CardinalityEstimator& estimator, std::span<const LabeledQuery> workload);

/// Shortest text that parses back to the same double.
std::string formatDouble(double value);

/// workload,model,joins,p50,p75,p90,p95,p99,max,mean,n
std::string statsCsvHeader();
std::string statsCsvRow(const std::string& workload, const std::string& model, const std::string& joins,
                        const QErrorStats& stats);

/// Overall row ("all") followed by one row per join count.
void writeStatsCsv(std::ostream& out, const std::string& workload, const std::string& model,
                   const QErrorStats& overall, const JoinBreakdown* breakdown);

} // namespace cntcard
