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
#include <utility>
#include <vector>

#include "cntcard/query.h"
#include "cntcard/relstore.h"
#include "cntcard/rng.h"

namespace cntcard {

struct GenConfig {
  /// Largest join count of a generated query.
  std::size_t maxJoins = 2;
  std::size_t numInitial = 100;
  std::size_t perturbationsPerQuery = 4;
  /// Random same-FROM partners drawn per initial query when pairing.
  std::size_t crossPairsPerQuery = 2;
  /// Draw the join count uniformly before drawing a table set of that size,
  /// instead of drawing uniformly over all connected table sets.
  bool balanceJoins = false;
  /// Keep only queries with a nonempty result; for pairs this applies to the
  /// first query, whose result is the denominator of the rate.
  bool nonEmptyOnly = false;
  std::uint64_t seed = 0;
};

/// Throws a config error when a field is out of range.
void validate(const GenConfig& cfg);

struct LabeledPair {
  Query q1;
  Query q2;
  double rate = 0.0;

  bool operator==(const LabeledPair&) const = default;
};

struct LabeledQuery {
  Query q;
  std::uint64_t card = 0;

  bool operator==(const LabeledQuery&) const = default;
};

/// Every connected table set with at most maxTables tables, each sorted,
/// listed by size and then lexicographically.
std::vector<std::vector<std::string>> connectedTableSets(const Schema& schema, std::size_t maxTables);

/// Predicate-free query over the tables with every declared edge among them.
Query queryForTables(const Schema& schema, const std::vector<std::string>& tables);

/// Adds per-table random predicates: for each table a count uniform in
/// [0, #non-key columns], each a uniform column, operator, and value from
/// the column's stored range.
void addRandomPredicates(Query& q, const Database& db, Rng& rng);

/// Step 1: random connected table sets with their joins and predicates.
std::vector<Query> genInitialQueries(const GenConfig& cfg, const Database& db, Rng& rng);

/// Step 2: n variants of q that differ from it only in predicates (flipped
/// operators, redrawn values, or added predicates). Throws an
/// empty-perturbation error when q has no predicate and no column to add one on.
std::vector<Query> perturb(const Query& q, const Database& db, std::size_t n, Rng& rng);

/// Step 3: same-FROM pairs, unique after canonicalization. perturbed[i]
/// holds the variants of initial[i].
std::vector<std::pair<Query, Query>> pairQueries(
    const std::vector<Query>& initial,
    const std::vector<std::vector<Query>>& perturbed,
    const GenConfig& cfg,
    Rng& rng);

std::vector<LabeledPair> labelPairs(const std::vector<std::pair<Query, Query>>& pairs, const Database& db);

struct PairSplit {
  std::vector<LabeledPair> train;
  std::vector<LabeledPair> validation;
};

/// Shuffles and splits 80% / 20%.
PairSplit splitTrainValidation(std::vector<LabeledPair> pairs, Rng& rng);

/// The full three-step pipeline, labeled, truncated to numPairs.
std::vector<LabeledPair> genPairWorkload(const GenConfig& cfg, const Database& db, std::size_t numPairs);

/// Distinct labeled queries drawn by the step-1 generator.
std::vector<LabeledQuery> genQueryWorkload(const GenConfig& cfg, const Database& db, std::size_t numQueries);

/// Queries spread round-robin over every connected FROM clause with at most
/// cfg.maxJoins joins. With coverage set, each FROM clause's first query is
/// predicate-free.
std::vector<LabeledQuery> genPoolQueries(const GenConfig& cfg, const Database& db, std::size_t numQueries, bool coverage);

} // namespace cntcard
