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

#include "cntcard/evalharness.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "cntcard/error.h"

namespace cntcard {

double percentile(std::span<const double> values, double p) {
  check(!values.empty(), ErrorKind::kConfig, "percentile of an empty list");
  check(p > 0.0 && p <= 100.0, ErrorKind::kConfig, "percentile outside (0, 100]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(sorted.size()) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

QErrorStats computeStats(std::span<const double> qerrors) {
  QErrorStats s;
  s.count = qerrors.size();
  if (qerrors.empty()) {
    return s;
  }
  s.p50 = percentile(qerrors, 50);
  s.p75 = percentile(qerrors, 75);
  s.p90 = percentile(qerrors, 90);
  s.p95 = percentile(qerrors, 95);
  s.p99 = percentile(qerrors, 99);
  s.max = *std::max_element(qerrors.begin(), qerrors.end());
  // Summation in sorted order keeps the mean independent of input order.
  std::vector<double> sorted(qerrors.begin(), qerrors.end());
  std::sort(sorted.begin(), sorted.end());
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  return s;
}

double cardinalityQError(double estimate, double truth) {
  const double e = std::max(estimate, 1.0);
  const double t = std::max(truth, 1.0);
  return e > t ? e / t : t / e;
}

ContainmentEvaluation evalContainment(
    const ContainmentEstimator& model,
    std::span<const LabeledPair> workload,
    double labelFloor) {
  check(!workload.empty(), ErrorKind::kConfig, "empty containment workload");
  ContainmentEvaluation out;
  out.qerrors.reserve(workload.size());
  std::map<std::size_t, std::vector<double>> perJoin;
  for (const auto& pair : workload) {
    // Composite models can answer exactly 0, so the estimate shares the label floor.
    const double estimate = std::max(model.rate(pair.q1, pair.q2), labelFloor);
    out.qerrors.push_back(qerror(pair.rate, estimate, labelFloor));
    perJoin[canonicalize(pair.q1).joinCount()].push_back(out.qerrors.back());
  }
  out.stats = computeStats(out.qerrors);
  for (const auto& [joins, values] : perJoin) {
    out.breakdown.byJoins[joins] = computeStats(values);
  }
  return out;
}

CardinalityEvaluation evalCardinality(const CardinalityEstimator& estimator, std::span<const LabeledQuery> workload) {
  check(!workload.empty(), ErrorKind::kConfig, "empty cardinality workload");
  CardinalityEvaluation out;
  std::map<std::size_t, std::vector<double>> perJoin;
  for (const auto& item : workload) {
    const double est = estimator.estimate(item.q);
    const double qe = cardinalityQError(est, static_cast<double>(item.card));
    out.estimates.push_back(est);
    out.qerrors.push_back(qe);
    perJoin[canonicalize(item.q).joinCount()].push_back(qe);
  }
  out.stats = computeStats(out.qerrors);
  for (const auto& [joins, values] : perJoin) {
    out.breakdown.byJoins[joins] = computeStats(values);
  }
  return out;
}

std::string formatDouble(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string statsCsvHeader() {
  return "workload,model,joins,p50,p75,p90,p95,p99,max,mean,n";
}

std::string statsCsvRow(const std::string& workload, const std::string& model, const std::string& joins,
                        const QErrorStats& s) {
  std::string row = workload + "," + model + "," + joins;
  for (double v : {s.p50, s.p75, s.p90, s.p95, s.p99, s.max, s.mean}) {
    row += "," + formatDouble(v);
  }
  row += "," + std::to_string(s.count);
  return row;
}

void writeStatsCsv(std::ostream& out, const std::string& workload, const std::string& model,
                   const QErrorStats& overall, const JoinBreakdown* breakdown) {
  out << statsCsvRow(workload, model, "all", overall) << "\n";
  if (breakdown != nullptr) {
    for (const auto& [joins, stats] : breakdown->byJoins) {
      out << statsCsvRow(workload, model, std::to_string(joins), stats) << "\n";
    }
  }
}

} // namespace cntcard
