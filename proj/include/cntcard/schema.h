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

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cntcard {

/// Table-qualified column name. The natural ordering (table, then column) is
/// the global column order used throughout: tables sorted by name, columns
/// sorted by name within a table.
struct ColumnRef {
  std::string table;
  std::string column;

  auto operator<=>(const ColumnRef&) const = default;

  std::string qualified() const {
    return table + "." + column;
  }

  /// Parses "table.column"; throws a query error on malformed input.
  static ColumnRef parse(std::string_view text);
};

struct ColumnDef {
  std::string name;
  std::int64_t min = 0;
  std::int64_t max = 0;

  bool operator==(const ColumnDef&) const = default;
};

/// A table's physical layout is its key columns followed by its non-key
/// columns, each in declaration order. The first key column is the primary
/// key; any further key column is a foreign key and must be joined to some
/// primary key through a join edge.
struct TableDef {
  std::string name;
  std::vector<std::string> keyCols;
  std::vector<ColumnDef> cols;

  bool operator==(const TableDef&) const = default;

  std::size_t width() const {
    return keyCols.size() + cols.size();
  }
};

struct JoinEdge {
  ColumnRef left;
  ColumnRef right;

  bool operator==(const JoinEdge&) const = default;
};

/// Validated, immutable schema. Construct through create().
class Schema {
 public:
  static Schema create(std::vector<TableDef> tables, std::vector<JoinEdge> joinEdges);

  const std::vector<TableDef>& tables() const {
    return tables_;
  }
  const std::vector<JoinEdge>& joinEdges() const {
    return joinEdges_;
  }

  std::optional<std::size_t> tableIndex(std::string_view name) const;
  const TableDef& table(std::string_view name) const;

  /// Position of a column in its table's physical layout.
  std::optional<std::size_t> columnPosition(std::size_t tableIdx, std::string_view column) const;
  bool isKeyPosition(std::size_t tableIdx, std::size_t position) const {
    return position < tables_[tableIdx].keyCols.size();
  }
  std::string columnName(std::size_t tableIdx, std::size_t position) const;

  /// All columns (key and non-key) in global order.
  const std::vector<ColumnRef>& globalColumns() const {
    return globalColumns_;
  }
  std::optional<std::size_t> globalIndex(const ColumnRef& column) const;

  /// Declared non-key range, or nullopt for key columns / unknown columns.
  std::optional<ColumnDef> nonKeyColumn(const ColumnRef& column) const;
  bool isKeyColumn(const ColumnRef& column) const;

  /// True when (a, b) or (b, a) is a declared join edge.
  bool isJoinEdge(const ColumnRef& a, const ColumnRef& b) const;

  /// The primary key referenced by a foreign-key column, if any.
  std::optional<ColumnRef> referencedKey(const ColumnRef& foreignKey) const;

  /// Stable hex digest of the schema content.
  const std::string& hash() const {
    return hash_;
  }

  bool operator==(const Schema& other) const {
    return tables_ == other.tables_ && joinEdges_ == other.joinEdges_;
  }

 private:
  Schema() = default;

  std::vector<TableDef> tables_;
  std::vector<JoinEdge> joinEdges_;
  std::vector<ColumnRef> globalColumns_;
  std::string hash_;
};

} // namespace cntcard
