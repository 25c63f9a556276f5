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

#include "cntcard/featurizer.h"

#include <algorithm>

#include "cntcard/error.h"

namespace cntcard {

FeatureSpace FeatureSpace::build(const Schema& schema) {
  std::vector<std::string> tables;
  for (const auto& t : schema.tables()) {
    tables.push_back(t.name);
  }
  std::sort(tables.begin(), tables.end());
  std::vector<ColumnRange> ranges;
  for (const auto& col : schema.globalColumns()) {
    auto def = schema.nonKeyColumn(col);
    ranges.push_back(def ? ColumnRange{def->min, def->max} : ColumnRange{});
  }
  return fromParts(std::move(tables), schema.globalColumns(), std::move(ranges), schema.hash());
}

FeatureSpace FeatureSpace::fromParts(
    std::vector<std::string> tables,
    std::vector<ColumnRef> columns,
    std::vector<ColumnRange> ranges,
    std::string schemaHash) {
  check(std::is_sorted(tables.begin(), tables.end()) &&
            std::adjacent_find(tables.begin(), tables.end()) == tables.end(),
        ErrorKind::kFeaturization, "table index is not a sorted bijection");
  check(std::is_sorted(columns.begin(), columns.end()) &&
            std::adjacent_find(columns.begin(), columns.end()) == columns.end(),
        ErrorKind::kFeaturization, "column index is not a sorted bijection");
  check(ranges.size() == columns.size(), ErrorKind::kFeaturization, "column range count mismatch");
  for (const auto& r : ranges) {
    check(r.min <= r.max, ErrorKind::kFeaturization, "column range with min > max");
  }
  FeatureSpace s;
  s.tables_ = std::move(tables);
  s.columns_ = std::move(columns);
  s.ranges_ = std::move(ranges);
  s.schemaHash_ = std::move(schemaHash);
  return s;
}

std::size_t FeatureSpace::tableIndex(const std::string& table) const {
  auto it = std::lower_bound(tables_.begin(), tables_.end(), table);
  check(it != tables_.end() && *it == table, ErrorKind::kFeaturization, "unknown table '" + table + "'");
  return static_cast<std::size_t>(it - tables_.begin());
}

std::size_t FeatureSpace::columnIndex(const ColumnRef& column) const {
  auto it = std::lower_bound(columns_.begin(), columns_.end(), column);
  check(it != columns_.end() && *it == column, ErrorKind::kFeaturization,
        "unknown column '" + column.qualified() + "'");
  return static_cast<std::size_t>(it - columns_.begin());
}

double FeatureSpace::normalize(const ColumnRef& column, std::int64_t value) const {
  const auto& r = ranges_[columnIndex(column)];
  if (r.min == r.max) {
    return 0.5;
  }
  const double x = (static_cast<double>(value) - static_cast<double>(r.min)) /
                   (static_cast<double>(r.max) - static_cast<double>(r.min));
  return std::clamp(x, 0.0, 1.0);
}

VectorSet featurize(const Query& raw, const FeatureSpace& space) {
  const Query q = canonicalize(raw);
  const std::size_t width = space.width();
  VectorSet out;
  out.reserve(q.tables.size() + q.joins.size() + q.predicates.size());
  for (const auto& t : q.tables) {
    FeatureVector v(width, 0.0);
    v[space.tableSegment() + space.tableIndex(t)] = 1.0;
    out.push_back(std::move(v));
  }
  for (const auto& j : q.joins) {
    FeatureVector v(width, 0.0);
    v[space.join1Segment() + space.columnIndex(j.left)] = 1.0;
    v[space.join2Segment() + space.columnIndex(j.right)] = 1.0;
    out.push_back(std::move(v));
  }
  for (const auto& p : q.predicates) {
    FeatureVector v(width, 0.0);
    v[space.columnSegment() + space.columnIndex(p.column)] = 1.0;
    v[space.opSegment() + static_cast<std::size_t>(p.op)] = 1.0;
    v[space.valueSegment()] = space.normalize(p.column, p.value);
    out.push_back(std::move(v));
  }
  return out;
}

} // namespace cntcard
