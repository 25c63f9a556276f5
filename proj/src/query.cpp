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

#include "cntcard/query.h"

#include <algorithm>
#include <numeric>

#include "cntcard/error.h"

namespace cntcard {

std::string_view opSymbol(CompareOp op) {
  switch (op) {
    case CompareOp::kLess:
      return "<";
    case CompareOp::kEqual:
      return "=";
    case CompareOp::kGreater:
      return ">";
  }
  return "?";
}

CompareOp parseOp(std::string_view symbol) {
  if (symbol == "<") {
    return CompareOp::kLess;
  }
  if (symbol == "=") {
    return CompareOp::kEqual;
  }
  if (symbol == ">") {
    return CompareOp::kGreater;
  }
  fail(ErrorKind::kQuery, "unknown operator '" + std::string(symbol) + "'");
}

namespace {

template <typename T>
void sortUnique(std::vector<T>& items) {
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
}

} // namespace

Query canonicalize(const Query& q) {
  Query out = q;
  sortUnique(out.tables);
  for (auto& join : out.joins) {
    if (join.right < join.left) {
      std::swap(join.left, join.right);
    }
  }
  sortUnique(out.joins);
  sortUnique(out.predicates);
  return out;
}

void validate(const Query& raw, const Schema& schema) {
  const Query q = canonicalize(raw);
  check(!q.tables.empty(), ErrorKind::kQuery, "query has no tables");
  for (const auto& name : q.tables) {
    check(schema.tableIndex(name).has_value(), ErrorKind::kQuery, "unknown table '" + name + "'");
  }
  auto slotOf = [&](const std::string& table) -> std::size_t {
    auto it = std::lower_bound(q.tables.begin(), q.tables.end(), table);
    check(it != q.tables.end() && *it == table, ErrorKind::kQuery,
          "table '" + table + "' is not in the FROM clause");
    return static_cast<std::size_t>(it - q.tables.begin());
  };
  auto checkColumn = [&](const ColumnRef& col) {
    check(schema.globalIndex(col).has_value(), ErrorKind::kQuery,
          "unknown column '" + col.qualified() + "'");
  };

  std::vector<std::size_t> parent(q.tables.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      x = parent[x] = parent[parent[x]];
    }
    return x;
  };
  for (const auto& join : q.joins) {
    checkColumn(join.left);
    checkColumn(join.right);
    const std::size_t a = slotOf(join.left.table);
    const std::size_t b = slotOf(join.right.table);
    check(a != b, ErrorKind::kQuery,
          "join " + join.left.qualified() + " = " + join.right.qualified() + " is within one table");
    check(schema.isJoinEdge(join.left, join.right), ErrorKind::kQuery,
          "join " + join.left.qualified() + " = " + join.right.qualified() + " is not a declared edge");
    parent[find(a)] = find(b);
  }
  for (std::size_t i = 1; i < q.tables.size(); ++i) {
    check(find(i) == find(0), ErrorKind::kQuery, "join graph is not connected");
  }
  for (const auto& pred : q.predicates) {
    checkColumn(pred.column);
    slotOf(pred.column.table);
    check(!schema.isKeyColumn(pred.column), ErrorKind::kQuery,
          "predicate on key column '" + pred.column.qualified() + "'");
  }
}

bool sameFrom(const Query& q1, const Query& q2) {
  auto a = q1.tables;
  auto b = q2.tables;
  sortUnique(a);
  sortUnique(b);
  return a == b;
}

std::string fromKey(const Query& q) {
  auto tables = q.tables;
  sortUnique(tables);
  std::string key;
  for (const auto& t : tables) {
    if (!key.empty()) {
      key += ',';
    }
    key += t;
  }
  return key;
}

Query intersect(const Query& q1, const Query& q2) {
  Query a = canonicalize(q1);
  const Query b = canonicalize(q2);
  check(a.tables == b.tables, ErrorKind::kContainmentDomain,
        "FROM clauses differ: {" + fromKey(a) + "} vs {" + fromKey(b) + "}");
  check(a.joins == b.joins, ErrorKind::kContainmentDomain, "join sets differ");
  a.predicates.insert(a.predicates.end(), b.predicates.begin(), b.predicates.end());
  sortUnique(a.predicates);
  return a;
}

std::string toSql(const Query& raw) {
  const Query q = canonicalize(raw);
  std::string sql = "SELECT * FROM ";
  for (std::size_t i = 0; i < q.tables.size(); ++i) {
    sql += (i ? ", " : "") + q.tables[i];
  }
  std::vector<std::string> conjuncts;
  for (const auto& join : q.joins) {
    conjuncts.push_back(join.left.qualified() + " = " + join.right.qualified());
  }
  for (const auto& pred : q.predicates) {
    conjuncts.push_back(pred.column.qualified() + " " + std::string(opSymbol(pred.op)) + " " +
                        std::to_string(pred.value));
  }
  for (std::size_t i = 0; i < conjuncts.size(); ++i) {
    sql += (i ? " AND " : " WHERE ") + conjuncts[i];
  }
  sql += ";";
  return sql;
}

} // namespace cntcard
