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

#include <gtest/gtest.h>

#include "cntcard/error.h"
#include "cntcard/qgen.h"
#include "cntcard/rng.h"
#include "test_support.h"

namespace cntcard {
namespace {

const ColumnRef kAid{"A", "id"};
const ColumnRef kBaid{"B", "a_id"};
const ColumnRef kAx{"A", "x"};

TEST(CanonicalizeTest, OrientsJoinsByGlobalColumnOrder) {
  const Query q{{"B", "A"}, {{kBaid, kAid}}, {}};
  const Query c = canonicalize(q);
  EXPECT_EQ(c.tables, (std::vector<std::string>{"A", "B"}));
  ASSERT_EQ(c.joins.size(), 1u);
  EXPECT_EQ(c.joins[0].left, kAid);
  EXPECT_EQ(c.joins[0].right, kBaid);
}

TEST(CanonicalizeTest, IdempotentAndDeduplicating) {
  const Query q{{"A", "A"}, {}, {{kAx, CompareOp::kLess, 5}, {kAx, CompareOp::kGreater, 1}, {kAx, CompareOp::kLess, 5}}};
  const Query c = canonicalize(q);
  EXPECT_EQ(c.tables.size(), 1u);
  EXPECT_EQ(c.predicates.size(), 2u);
  EXPECT_EQ(canonicalize(c), c);
}

TEST(CanonicalizeTest, StableUnderPermutation) {
  const auto db = buildDatabase(test::threeTableSchema(), {{"A", 5}, {"B", 5}, {"C", 5}}, 1);
  GenConfig cfg;
  cfg.numInitial = 100;
  Rng rng(3);
  for (const auto& q : genInitialQueries(cfg, db, rng)) {
    Query shuffled = q;
    rng.shuffle(std::span<std::string>(shuffled.tables));
    rng.shuffle(std::span<Join>(shuffled.joins));
    rng.shuffle(std::span<Predicate>(shuffled.predicates));
    for (auto& j : shuffled.joins) {
      if (rng.index(2) == 0) {
        std::swap(j.left, j.right);
      }
    }
    EXPECT_EQ(canonicalize(shuffled), canonicalize(q));
  }
}

TEST(SameFromTest, Examples) {
  const Query ab{{"A", "B"}, {{kAid, kBaid}}, {}};
  const Query ba{{"B", "A"}, {{kAid, kBaid}}, {}};
  const Query a{{"A"}, {}, {}};
  EXPECT_TRUE(sameFrom(ab, ba));
  EXPECT_FALSE(sameFrom(a, ab));
  EXPECT_TRUE(sameFrom(a, a));
  EXPECT_EQ(fromKey(ba), "A,B");
}

TEST(IntersectTest, UnionOfPredicates) {
  const Query q1{{"A"}, {}, {{kAx, CompareOp::kLess, 5}}};
  const Query q2{{"A"}, {}, {{kAx, CompareOp::kGreater, 2}}};
  EXPECT_EQ(intersect(q1, q1), canonicalize(q1));
  const Query both = intersect(q1, q2);
  EXPECT_EQ(both.predicates.size(), 2u);
  EXPECT_EQ(both.tables, q1.tables);
}

TEST(IntersectTest, MismatchedFromIsAContainmentDomainError) {
  try {
    intersect(Query{{"A"}, {}, {}}, Query{{"A", "B"}, {{kAid, kBaid}}, {}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kContainmentDomain);
  }
}

TEST(ValidateTest, RejectsStructuralViolations) {
  const Schema s = test::threeTableSchema();
  EXPECT_NO_THROW(validate(Query{{"A", "B"}, {{kAid, kBaid}}, {{kAx, CompareOp::kEqual, 3}}}, s));
  // Disconnected.
  EXPECT_THROW(validate(Query{{"A", "C"}, {}, {}}, s), Error);
  // Not a declared edge.
  EXPECT_THROW(validate(Query{{"A", "C"}, {{kAid, {"C", "b_id"}}}, {}}, s), Error);
  // Predicate on a key column or on a table outside FROM.
  EXPECT_THROW(validate(Query{{"A"}, {}, {{kAid, CompareOp::kEqual, 3}}}, s), Error);
  EXPECT_THROW(validate(Query{{"A"}, {}, {{{"B", "y"}, CompareOp::kEqual, 3}}}, s), Error);
  // Contradictions are legal.
  EXPECT_NO_THROW(validate(Query{{"A"}, {}, {{kAx, CompareOp::kEqual, 3}, {kAx, CompareOp::kEqual, 5}}}, s));
}

TEST(ToSqlTest, PrintsCanonicalText) {
  const Query q{{"B", "A"}, {{kBaid, kAid}}, {{kAx, CompareOp::kLess, 5}}};
  EXPECT_EQ(toSql(q), "SELECT * FROM A, B WHERE A.id = B.a_id AND A.x < 5;");
  EXPECT_EQ(toSql(Query{{"A"}, {}, {}}), "SELECT * FROM A;");
}

TEST(ColumnRefTest, Parse) {
  EXPECT_EQ(ColumnRef::parse("A.x"), kAx);
  EXPECT_THROW(ColumnRef::parse("Ax"), Error);
  EXPECT_THROW(ColumnRef::parse("A.x.y"), Error);
}

} // namespace
} // namespace cntcard
