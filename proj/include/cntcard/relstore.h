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
#include <span>
#include <string>
#include <vector>

#include "cntcard/query.h"
#include "cntcard/schema.h"

namespace cntcard {

/// Row-major storage for one table; width equals TableDef::width().
struct TableData {
  std::size_t width = 0;
  std::vector<std::int64_t> values;

  std::size_t rowCount() const {
    return width == 0 ? 0 : values.size() / width;
  }
  std::span<const std::int64_t> row(std::size_t i) const {
    return {values.data() + i * width, width};
  }

  bool operator==(const TableData&) const = default;
};

/// Exact per-column statistics. For an empty table min and max are 0.
struct ColumnStats {
  std::int64_t min = 0;
  std::int64_t max = 0;
  std::uint64_t rows = 0;
  std::uint64_t distinct = 0;

  bool operator==(const ColumnStats&) const = default;
};

/// Knobs of the synthetic data generator. Rows carry a latent factor that
/// drives their non-key values, and foreign keys prefer low-numbered parents,
/// so columns are correlated within and across joins.
struct DataGenOptions {
  /// Weight of the row latent in each non-key value; 0 gives independent columns.
  double correlation = 0.7;
  /// Exponent shaping the foreign-key parent choice; 1 is uniform.
  double fkSkew = 2.0;
  /// Weight of the parent's latent in a child row's latent.
  double inheritance = 0.6;
};

/// Immutable in-memory database instance.
class Database {
 public:
  /// Validates value ranges and computes exact statistics.
  Database(Schema schema, std::vector<TableData> tables);

  const Schema& schema() const {
    return schema_;
  }
  const TableData& table(std::size_t tableIdx) const {
    return tables_[tableIdx];
  }
  const std::vector<TableData>& tables() const {
    return tables_;
  }
  std::size_t rowCount(std::size_t tableIdx) const {
    return tables_[tableIdx].rowCount();
  }
  std::size_t totalRows() const;

  const ColumnStats& stats(std::size_t tableIdx, std::size_t position) const {
    return stats_[tableIdx][position];
  }
  const ColumnStats& stats(const ColumnRef& column) const;

  bool operator==(const Database& other) const {
    return schema_ == other.schema_ && tables_ == other.tables_;
  }

 private:
  Schema schema_;
  std::vector<TableData> tables_;
  std::vector<std::vector<ColumnStats>> stats_;
};

/// Deterministic synthetic instance. Primary keys are 1..n; foreign keys draw
/// from the referenced table's populated keys.
Database buildDatabase(
    const Schema& schema,
    const std::map<std::string, std::size_t>& rowCounts,
    std::uint64_t seed,
    const DataGenOptions& options = {});

/// Set of full-width result tuples. Columns are the query's tables in sorted
/// order, each contributing its full physical layout.
struct ResultSet {
  std::vector<ColumnRef> columns;
  std::vector<std::vector<std::int64_t>> rows;

  std::size_t size() const {
    return rows.size();
  }
};

ResultSet execute(const Query& q, const Database& db);

/// |execute(q, db)| without materializing the tuples.
std::uint64_t cardinality(const Query& q, const Database& db);

/// |Q1(D) ∩ Q2(D)| / |Q1(D)|, or 0 when Q1(D) is empty.
double trueContainmentRate(const Query& q1, const Query& q2, const Database& db);

} // namespace cntcard
