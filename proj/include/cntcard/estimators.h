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

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cntcard/crn.h"
#include "cntcard/featurizer.h"
#include "cntcard/qgen.h"
#include "cntcard/query.h"
#include "cntcard/relstore.h"

namespace cntcard {

class CardinalityEstimator {
 public:
  virtual ~CardinalityEstimator() = default;
  /// Nonnegative, finite estimate of |q(D)|.
  virtual double estimate(const Query& q) const = 0;
};

class ContainmentEstimator {
 public:
  virtual ~ContainmentEstimator() = default;
  /// Estimated fraction of q1's result rows that are also in q2's result.
  /// Nonnegative; composites over inexact models may exceed 1.
  virtual double rate(const Query& q1, const Query& q2) const = 0;
};

// ---------------------------------------------------------------------------
// Cardinality estimators

/// Executes the query. The database must outlive the estimator.
class ExactCardinality final : public CardinalityEstimator {
 public:
  explicit ExactCardinality(const Database& db) : db_(db) {}
  double estimate(const Query& q) const override;

 private:
  const Database& db_;
};

class ConstantCardinality final : public CardinalityEstimator {
 public:
  explicit ConstantCardinality(double value) : value_(value) {}
  double estimate(const Query&) const override {
    return value_;
  }

 private:
  double value_;
};

/// Profiled row counts and per-column statistics.
struct ColumnStatsModel {
  std::map<std::string, std::uint64_t> tableRows;
  std::map<ColumnRef, ColumnStats> columns;

  static ColumnStatsModel fromDatabase(const Database& db);
};

/// Uniformity and independence: base row counts times per-predicate and
/// per-join selectivities, floored at 1.
double independenceEstimate(const Query& q, const ColumnStatsModel& stats);

class IndependenceEstimator final : public CardinalityEstimator {
 public:
  explicit IndependenceEstimator(ColumnStatsModel stats) : stats_(std::move(stats)) {}
  double estimate(const Query& q) const override {
    return independenceEstimate(q, stats_);
  }

 private:
  ColumnStatsModel stats_;
};

// ---------------------------------------------------------------------------
// Containment estimators

class ExactContainment final : public ContainmentEstimator {
 public:
  explicit ExactContainment(const Database& db) : db_(db) {}
  double rate(const Query& q1, const Query& q2) const override {
    return trueContainmentRate(q1, q2, db_);
  }

 private:
  const Database& db_;
};

/// A trained network; parameters and space are held by reference.
class CrnContainment final : public ContainmentEstimator {
 public:
  CrnContainment(const CrnParams& params, const FeatureSpace& space) : params_(params), space_(space) {}
  double rate(const Query& q1, const Query& q2) const override {
    return predict(params_, space_, q1, q2);
  }

 private:
  const CrnParams& params_;
  const FeatureSpace& space_;
};

/// Containment from cardinalities: M(q1 ∩ q2) / M(q1), or 0 when M(q1) is 0.
class Crd2Cnt final : public ContainmentEstimator {
 public:
  explicit Crd2Cnt(const CardinalityEstimator& model) : model_(model) {}
  double rate(const Query& q1, const Query& q2) const override;

 private:
  const CardinalityEstimator& model_;
};

// ---------------------------------------------------------------------------
// Cardinality from containment

enum class FinalFunction { kMedian, kMean, kTrimmedMean };

std::string_view finalFunctionName(FinalFunction fn);
FinalFunction parseFinalFunction(std::string_view name);

/// Default share trimmed from each tail by the trimmed mean (25% in total).
inline constexpr double kDefaultTrimPerTail = 0.125;

/// Collapses per-record estimates into one value. Median averages the two
/// middle values of an even-length list; the trimmed mean drops
/// ceil(trimPerTail * n) values from each tail while keeping at least one.
/// The list must be nonempty.
double applyFinalFunction(std::vector<double> results, FinalFunction fn, double trimPerTail = kDefaultTrimPerTail);

/// Previously executed queries with their true cardinalities, indexed by FROM
/// clause. Records keep insertion order.
class QueriesPool {
 public:
  QueriesPool(std::vector<LabeledQuery> records, double epsilon, FinalFunction finalFn,
              double trimPerTail = kDefaultTrimPerTail);

  const std::vector<LabeledQuery>& records() const {
    return records_;
  }
  /// Indices into records() sharing the FROM clause key, in record order.
  std::span<const std::size_t> matching(const std::string& fromKey) const;
  const std::map<std::string, std::vector<std::size_t>>& index() const {
    return index_;
  }

  double epsilon() const {
    return epsilon_;
  }
  FinalFunction finalFunction() const {
    return finalFn_;
  }
  double trimPerTail() const {
    return trimPerTail_;
  }

 private:
  std::vector<LabeledQuery> records_;
  std::map<std::string, std::vector<std::size_t>> index_;
  double epsilon_;
  FinalFunction finalFn_;
  double trimPerTail_;
};

inline constexpr double kDefaultPoolEpsilon = 0.01;

QueriesPool buildPool(std::vector<LabeledQuery> workload, double epsilon = kDefaultPoolEpsilon,
                      FinalFunction finalFn = FinalFunction::kMedian);

/// (x_rate / y_rate) * |Q_old| with x_rate = rate(old, new) and
/// y_rate = rate(new, old); nullopt when y_rate <= 0.
std::optional<double> cnt2crdSingle(const ContainmentEstimator& rateModel, const Query& qNew, const LabeledQuery& record);

struct PoolEstimate {
  double estimate = 0.0;
  /// Records that contributed (same FROM clause and y_rate > epsilon).
  std::size_t applicable = 0;
  bool usedFallback = false;
};

/// Applies cnt2crdSingle to every same-FROM record whose y_rate exceeds the
/// pool's epsilon and collapses the results with the pool's final function;
/// with no contributing record the fallback answers.
PoolEstimate estimateCardinalityDetailed(
    const Query& qNew,
    const QueriesPool& pool,
    const ContainmentEstimator& rateModel,
    const CardinalityEstimator& fallback);

double estimateCardinality(
    const Query& qNew,
    const QueriesPool& pool,
    const ContainmentEstimator& rateModel,
    const CardinalityEstimator& fallback);

/// Cnt2Crd(rateModel) backed by a queries pool. With rateModel = Crd2Cnt(M)
/// and fallback = M this is the improved form of M.
class PooledCardinality final : public CardinalityEstimator {
 public:
  PooledCardinality(const QueriesPool& pool, const ContainmentEstimator& rateModel, const CardinalityEstimator& fallback)
      : pool_(pool), rateModel_(rateModel), fallback_(fallback) {}
  double estimate(const Query& q) const override {
    return estimateCardinality(q, pool_, rateModel_, fallback_);
  }

 private:
  const QueriesPool& pool_;
  const ContainmentEstimator& rateModel_;
  const CardinalityEstimator& fallback_;
};

} // namespace cntcard
