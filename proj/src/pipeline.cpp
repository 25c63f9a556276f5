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

#include "cntcard/pipeline.h"

#include <cmath>

#include "cntcard/error.h"
#include "cntcard/estimators.h"
#include "cntcard/rng.h"

namespace cntcard {

std::map<std::string, std::size_t> rowCountsFor(
    const Schema& schema,
    std::size_t defaultRows,
    const std::map<std::string, std::size_t>& overrides) {
  std::map<std::string, std::size_t> counts;
  for (const auto& t : schema.tables()) {
    counts[t.name] = defaultRows;
  }
  for (const auto& [name, rows] : overrides) {
    check(counts.contains(name), ErrorKind::kConfig, "row count given for unknown table '" + name + "'");
    counts[name] = rows;
  }
  return counts;
}

RoundTripReport roundTripCheck(
    const Database& db,
    const GenConfig& cfg,
    std::size_t numQueries,
    std::size_t poolSize,
    double tolerance) {
  GenConfig workloadCfg = cfg;
  workloadCfg.seed = deriveSeed(cfg.seed, "workload");
  GenConfig poolCfg = cfg;
  poolCfg.seed = deriveSeed(cfg.seed, "pool");
  const auto workload = genQueryWorkload(workloadCfg, db, numQueries);
  const QueriesPool pool = buildPool(genPoolQueries(poolCfg, db, poolSize, true));

  const ExactCardinality exact(db);
  const Crd2Cnt rates(exact);
  const IndependenceEstimator fallback(ColumnStatsModel::fromDatabase(db));
  const PooledCardinality pooled(pool, rates, fallback);

  RoundTripReport report;
  report.eval = evalCardinality(pooled, workload);
  for (std::size_t i = 0; i < workload.size(); ++i) {
    const auto detail = estimateCardinalityDetailed(workload[i].q, pool, rates, fallback);
    if (detail.usedFallback) {
      continue;
    }
    ++report.applicable;
    const double truth = static_cast<double>(workload[i].card);
    const double qe = std::max(detail.estimate, truth) / std::min(detail.estimate, truth);
    report.worstApplicableQError = std::max(report.worstApplicableQError, qe);
    if (std::abs(qe - 1.0) <= tolerance) {
      ++report.exact;
    }
  }
  return report;
}

} // namespace cntcard
