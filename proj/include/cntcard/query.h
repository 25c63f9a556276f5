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
#include <string>
#include <string_view>
#include <vector>

#include "cntcard/schema.h"

namespace cntcard {

/// Predicate comparison operators, in their fixed featurization order.
enum class CompareOp : std::uint8_t { kLess = 0, kEqual = 1, kGreater = 2 };

inline constexpr std::size_t kNumOps = 3;

std::string_view opSymbol(CompareOp op);
CompareOp parseOp(std::string_view symbol);

inline bool evalOp(CompareOp op, std::int64_t lhs, std::int64_t rhs) {
  switch (op) {
    case CompareOp::kLess:
      return lhs < rhs;
    case CompareOp::kEqual:
      return lhs == rhs;
    case CompareOp::kGreater:
      return lhs > rhs;
  }
  return false;
}

/// Equi-join between two key columns. Canonical orientation puts the column
/// with the lower global index on the left.
struct Join {
  ColumnRef left;
  ColumnRef right;

  auto operator<=>(const Join&) const = default;
};

struct Predicate {
  ColumnRef column;
  CompareOp op = CompareOp::kEqual;
  std::int64_t value = 0;

  auto operator<=>(const Predicate&) const = default;
};

/// Conjunctive SELECT * query: tables T, joins J, column predicates P.
struct Query {
  std::vector<std::string> tables;
  std::vector<Join> joins;
  std::vector<Predicate> predicates;

  auto operator<=>(const Query&) const = default;

  std::size_t joinCount() const {
    return joins.size();
  }
};

/// Deterministic normal form: tables sorted, joins oriented and sorted,
/// predicates sorted, duplicates dropped. Idempotent.
Query canonicalize(const Query& q);

/// Checks every structural invariant against the schema; throws a query
/// error naming the first violation.
void validate(const Query& q, const Schema& schema);

/// True iff the FROM clauses (table sets) are equal.
bool sameFrom(const Query& q1, const Query& q2);

/// Key identifying a FROM clause: sorted table names joined by ','.
std::string fromKey(const Query& q);

/// Query whose WHERE clause conjoins both inputs' WHERE clauses. Both inputs
/// must share tables and joins; throws a containment-domain error otherwise.
Query intersect(const Query& q1, const Query& q2);

/// Human-readable SQL text (SELECT * FROM ... WHERE ...).
std::string toSql(const Query& q);

} // namespace cntcard
