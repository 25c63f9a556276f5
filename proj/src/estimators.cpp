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

#include "cntcard/estimators.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cntcard/error.h"

namespace cntcard {

double ExactCardinality::estimate(const Query& q) const {
  return static_cast<double>(cardinality(q, db_));
}

ColumnStatsModel ColumnStatsModel::fromDatabase(const Database& db) {
  ColumnStatsModel model;
  const Schema& schema = db.schema();
  for (std::size_t t = 0; t < schema.tables().size(); ++t) {
    const auto& def = schema.tables()[t];
    model.tableRows[def.name] = db.rowCount(t);
    for (std::size_t c = 0; c < def.width(); ++c) {
      model.columns[{def.name, schema.columnName(t, c)}] = db.stats(t, c);
    }
  }
  return model;
}

double independenceEstimate(const Query& q, const ColumnStatsModel& stats) {
  auto column = [&](const ColumnRef& ref) -> const ColumnStats& {
    auto it = stats.columns.find(ref);
    check(it != stats.columns.end(), ErrorKind::kQuery, "no statistics for '" + ref.qualified() + "'");
    return it->second;
  };
  double estimate = 1.0;
  for (const auto& t : q.tables) {
    auto it = stats.tableRows.find(t);
    check(it != stats.tableRows.end(), ErrorKind::kQuery, "no statistics for table '" + t + "'");
    estimate *= static_cast<double>(it->second);
  }
  for (const auto& p : q.predicates) {
    const auto& st = column(p.column);
    if (st.rows == 0 || st.distinct == 0) {
      estimate = 0.0;
      continue;
    }
    const double span = static_cast<double>(st.max - st.min) + 1.0;
    double selectivity = 0.0;
    switch (p.op) {
      case CompareOp::kEqual:
        selectivity = (p.value >= st.min && p.value <= st.max) ? 1.0 / static_cast<double>(st.distinct) : 0.0;
        break;
      case CompareOp::kLess:
        selectivity = std::clamp(static_cast<double>(p.value) - static_cast<double>(st.min), 0.0, span) / span;
        break;
      case CompareOp::kGreater:
        selectivity = std::clamp(static_cast<double>(st.max) - static_cast<double>(p.value), 0.0, span) / span;
        break;
    }
    estimate *= selectivity;
  }
  for (const auto& j : q.joins) {
    const double d = static_cast<double>(std::max(column(j.left).distinct, column(j.right).distinct));
    estimate *= d > 0.0 ? 1.0 / d : 0.0;
  }
  return std::max(estimate, 1.0);
}

double Crd2Cnt::rate(const Query& q1, const Query& q2) const {
  const Query both = intersect(q1, q2);
  const double base = model_.estimate(q1);
  if (base == 0.0) {
    return 0.0;
  }
  return model_.estimate(both) / base;
}

std::string_view finalFunctionName(FinalFunction fn) {
  switch (fn) {
    case FinalFunction::kMedian:
      return "median";
    case FinalFunction::kMean:
      return "mean";
    case FinalFunction::kTrimmedMean:
      return "trimmed-mean";
  }
  return "?";
}

FinalFunction parseFinalFunction(std::string_view name) {
  for (auto fn : {FinalFunction::kMedian, FinalFunction::kMean, FinalFunction::kTrimmedMean}) {
    if (finalFunctionName(fn) == name) {
      return fn;
    }
  }
  fail(ErrorKind::kConfig, "unknown final function '" + std::string(name) + "'");
}

double applyFinalFunction(std::vector<double> results, FinalFunction fn, double trimPerTail) {
  check(!results.empty(), ErrorKind::kConfig, "final function applied to an empty list");
  std::sort(results.begin(), results.end());
  const std::size_t n = results.size();
  switch (fn) {
    case FinalFunction::kMedian:
      return n % 2 == 1 ? results[n / 2] : 0.5 * (results[n / 2 - 1] + results[n / 2]);
    case FinalFunction::kMean:
      return std::accumulate(results.begin(), results.end(), 0.0) / static_cast<double>(n);
    case FinalFunction::kTrimmedMean: {
      auto drop = static_cast<std::size_t>(std::ceil(trimPerTail * static_cast<double>(n) - 1e-9));
      drop = std::min(drop, (n - 1) / 2);
      const auto first = results.begin() + static_cast<long>(drop);
      const auto last = results.end() - static_cast<long>(drop);
      return std::accumulate(first, last, 0.0) / static_cast<double>(n - 2 * drop);
    }
  }
  return 0.0;
}

QueriesPool::QueriesPool(std::vector<LabeledQuery> records, double epsilon, FinalFunction finalFn, double trimPerTail)
    : records_(std::move(records)), epsilon_(epsilon), finalFn_(finalFn), trimPerTail_(trimPerTail) {
  check(epsilon >= 0.0, ErrorKind::kConfig, "pool epsilon must be nonnegative");
  check(trimPerTail >= 0.0 && trimPerTail < 0.5, ErrorKind::kConfig, "trim share must lie in [0, 0.5)");
  for (std::size_t i = 0; i < records_.size(); ++i) {
    records_[i].q = canonicalize(records_[i].q);
    index_[fromKey(records_[i].q)].push_back(i);
  }
}

std::span<const std::size_t> QueriesPool::matching(const std::string& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) {
    return {};
  }
  return it->second;
}

QueriesPool buildPool(std::vector<LabeledQuery> workload, double epsilon, FinalFunction finalFn) {
  return QueriesPool(std::move(workload), epsilon, finalFn);
}

std::optional<double> cnt2crdSingle(const ContainmentEstimator& rateModel, const Query& qNew, const LabeledQuery& record) {
  const double yRate = rateModel.rate(qNew, record.q);
  if (!(yRate > 0.0)) {
    return std::nullopt;
  }
  const double xRate = rateModel.rate(record.q, qNew);
  return xRate / yRate * static_cast<double>(record.card);
}

PoolEstimate estimateCardinalityDetailed(
    const Query& qNew,
    const QueriesPool& pool,
    const ContainmentEstimator& rateModel,
    const CardinalityEstimator& fallback) {
  std::vector<double> results;
  for (std::size_t i : pool.matching(fromKey(qNew))) {
    const auto& record = pool.records()[i];
    const double yRate = rateModel.rate(qNew, record.q);
    if (yRate <= pool.epsilon()) {
      continue;
    }
    const double xRate = rateModel.rate(record.q, qNew);
    results.push_back(xRate / yRate * static_cast<double>(record.card));
  }
  PoolEstimate out;
  out.applicable = results.size();
  if (results.empty()) {
    out.usedFallback = true;
    out.estimate = fallback.estimate(qNew);
  } else {
    out.estimate = applyFinalFunction(std::move(results), pool.finalFunction(), pool.trimPerTail());
  }
  return out;
}

double estimateCardinality(
    const Query& qNew,
    const QueriesPool& pool,
    const ContainmentEstimator& rateModel,
    const CardinalityEstimator& fallback) {
  return estimateCardinalityDetailed(qNew, pool, rateModel, fallback).estimate;
}

} // namespace cntcard
