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
#include <string>
#include <vector>

#include "cntcard/query.h"
#include "cntcard/schema.h"

namespace cntcard {

using FeatureVector = std::vector<double>;
/// One vector per table, join and predicate of a query.
using VectorSet = std::vector<FeatureVector>;

/// Fixed-width vector layout shared by tables, joins and predicates:
///
///   | T-seg (#T) | J1-seg (#C) | J2-seg (#C) | C-seg (#C) | O-seg (#O) | V-seg (1) |
///
/// Tables and columns are indexed in sorted order, operators as <, =, >.
class FeatureSpace {
 public:
  struct ColumnRange {
    std::int64_t min = 0;
    std::int64_t max = 0;
    bool operator==(const ColumnRange&) const = default;
  };

  static FeatureSpace build(const Schema& schema);

  /// Rebuilds a space from its serialized parts; throws a featurization
  /// error when the parts are inconsistent.
  static FeatureSpace fromParts(
      std::vector<std::string> tables,
      std::vector<ColumnRef> columns,
      std::vector<ColumnRange> ranges,
      std::string schemaHash);

  std::size_t numTables() const {
    return tables_.size();
  }
  std::size_t numColumns() const {
    return columns_.size();
  }
  std::size_t numOps() const {
    return kNumOps;
  }
  std::size_t width() const {
    return numTables() + 3 * numColumns() + numOps() + 1;
  }

  std::size_t tableSegment() const {
    return 0;
  }
  std::size_t join1Segment() const {
    return numTables();
  }
  std::size_t join2Segment() const {
    return numTables() + numColumns();
  }
  std::size_t columnSegment() const {
    return numTables() + 2 * numColumns();
  }
  std::size_t opSegment() const {
    return numTables() + 3 * numColumns();
  }
  std::size_t valueSegment() const {
    return opSegment() + numOps();
  }

  std::size_t tableIndex(const std::string& table) const;
  std::size_t columnIndex(const ColumnRef& column) const;

  /// (v - min) / (max - min) clamped to [0, 1]; 0.5 for a single-valued column.
  double normalize(const ColumnRef& column, std::int64_t value) const;

  const std::vector<std::string>& tables() const {
    return tables_;
  }
  const std::vector<ColumnRef>& columns() const {
    return columns_;
  }
  const std::vector<ColumnRange>& ranges() const {
    return ranges_;
  }
  const std::string& schemaHash() const {
    return schemaHash_;
  }

  bool operator==(const FeatureSpace&) const = default;

 private:
  std::vector<std::string> tables_;
  std::vector<ColumnRef> columns_;
  std::vector<ColumnRange> ranges_;
  std::string schemaHash_;
};

/// Encodes a query as |T| + |J| + |P| vectors of width space.width(), in
/// canonical element order.
VectorSet featurize(const Query& q, const FeatureSpace& space);

} // namespace cntcard
