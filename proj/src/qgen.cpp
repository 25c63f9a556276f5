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

#include "cntcard/qgen.h"

#include <algorithm>
#include <map>
#include <set>

#include "cntcard/error.h"

namespace cntcard {

void validate(const GenConfig& cfg) {
  check(cfg.numInitial > 0, ErrorKind::kConfig, "numInitial must be positive");
  check(cfg.perturbationsPerQuery > 0, ErrorKind::kConfig, "perturbationsPerQuery must be positive");
}

std::vector<std::vector<std::string>> connectedTableSets(const Schema& schema, std::size_t maxTables) {
  std::map<std::string, std::set<std::string>> adjacent;
  for (const auto& e : schema.joinEdges()) {
    adjacent[e.left.table].insert(e.right.table);
    adjacent[e.right.table].insert(e.left.table);
  }
  std::set<std::vector<std::string>> seen;
  std::vector<std::vector<std::string>> frontier;
  for (const auto& t : schema.tables()) {
    if (maxTables >= 1) {
      frontier.push_back({t.name});
      seen.insert({t.name});
    }
  }
  std::vector<std::vector<std::string>> all;
  while (!frontier.empty()) {
    std::sort(frontier.begin(), frontier.end());
    all.insert(all.end(), frontier.begin(), frontier.end());
    std::vector<std::vector<std::string>> next;
    for (const auto& set : frontier) {
      if (set.size() >= maxTables) {
        continue;
      }
      for (const auto& t : set) {
        for (const auto& n : adjacent[t]) {
          if (std::binary_search(set.begin(), set.end(), n)) {
            continue;
          }
          auto grown = set;
          grown.insert(std::lower_bound(grown.begin(), grown.end(), n), n);
          if (seen.insert(grown).second) {
            next.push_back(std::move(grown));
          }
        }
      }
    }
    frontier = std::move(next);
  }
  return all;
}

Query queryForTables(const Schema& schema, const std::vector<std::string>& tables) {
  Query q;
  q.tables = tables;
  for (const auto& e : schema.joinEdges()) {
    const bool hasLeft = std::find(tables.begin(), tables.end(), e.left.table) != tables.end();
    const bool hasRight = std::find(tables.begin(), tables.end(), e.right.table) != tables.end();
    if (hasLeft && hasRight) {
      q.joins.push_back({e.left, e.right});
    }
  }
  return canonicalize(q);
}

namespace {

struct ValueRange {
  std::int64_t min;
  std::int64_t max;
};

ValueRange storedRange(const Database& db, const ColumnRef& column) {
  const auto& st = db.stats(column);
  if (st.rows > 0) {
    return {st.min, st.max};
  }
  const auto def = db.schema().nonKeyColumn(column);
  return {def->min, def->max};
}

Predicate randomPredicate(const Database& db, const std::string& table, Rng& rng) {
  const auto& def = db.schema().table(table);
  const auto& col = def.cols[rng.index(def.cols.size())];
  Predicate p;
  p.column = {table, col.name};
  p.op = static_cast<CompareOp>(rng.index(kNumOps));
  const auto range = storedRange(db, p.column);
  p.value = rng.uniformInt(range.min, range.max);
  return p;
}

std::vector<std::string> tablesWithNonKeyColumns(const Query& q, const Schema& schema) {
  std::vector<std::string> out;
  for (const auto& t : q.tables) {
    if (!schema.table(t).cols.empty()) {
      out.push_back(t);
    }
  }
  return out;
}

} // namespace

void addRandomPredicates(Query& q, const Database& db, Rng& rng) {
  for (const auto& t : q.tables) {
    const auto& def = db.schema().table(t);
    const auto count = static_cast<std::size_t>(rng.uniformInt(0, static_cast<std::int64_t>(def.cols.size())));
    for (std::size_t i = 0; i < count; ++i) {
      q.predicates.push_back(randomPredicate(db, t, rng));
    }
  }
  q = canonicalize(q);
}

std::vector<Query> genInitialQueries(const GenConfig& cfg, const Database& db, Rng& rng) {
  validate(cfg);
  const Schema& schema = db.schema();
  const auto sets = connectedTableSets(schema, cfg.maxJoins + 1);
  check(!sets.empty(), ErrorKind::kConfig, "schema has no tables");
  std::map<std::size_t, std::vector<Query>> byJoins;
  for (const auto& s : sets) {
    Query base = queryForTables(schema, s);
    byJoins[base.joinCount()].push_back(std::move(base));
  }
  std::vector<Query> bases;
  for (auto& [joins, qs] : byJoins) {
    bases.insert(bases.end(), qs.begin(), qs.end());
  }

  std::vector<Query> out;
  out.reserve(cfg.numInitial);
  for (std::size_t i = 0; i < cfg.numInitial; ++i) {
    Query q;
    if (cfg.balanceJoins) {
      auto it = byJoins.begin();
      std::advance(it, static_cast<long>(rng.index(byJoins.size())));
      q = it->second[rng.index(it->second.size())];
    } else {
      q = bases[rng.index(bases.size())];
    }
    addRandomPredicates(q, db, rng);
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<Query> perturb(const Query& raw, const Database& db, std::size_t n, Rng& rng) {
  check(n >= 1, ErrorKind::kConfig, "perturbation count must be positive");
  const Query q = canonicalize(raw);
  const auto addable = tablesWithNonKeyColumns(q, db.schema());
  check(!q.predicates.empty() || !addable.empty(), ErrorKind::kEmptyPerturbation,
        "query has no predicate to change and no column to add one on");

  constexpr int kMaxAttempts = 64;
  std::vector<Query> out;
  out.reserve(n);
  while (out.size() < n) {
    Query variant = q;
    for (int attempt = 0; attempt < kMaxAttempts && variant == q; ++attempt) {
      variant = q;
      const auto mutations = rng.uniformInt(1, 3);
      for (std::int64_t m = 0; m < mutations; ++m) {
        enum Kind { kFlip, kRedraw, kAdd };
        std::vector<Kind> kinds;
        if (!variant.predicates.empty()) {
          kinds.push_back(kFlip);
          kinds.push_back(kRedraw);
        }
        if (!addable.empty()) {
          kinds.push_back(kAdd);
        }
        switch (kinds[rng.index(kinds.size())]) {
          case kFlip: {
            auto& p = variant.predicates[rng.index(variant.predicates.size())];
            const auto shift = 1 + rng.index(kNumOps - 1);
            p.op = static_cast<CompareOp>((static_cast<std::size_t>(p.op) + shift) % kNumOps);
            break;
          }
          case kRedraw: {
            auto& p = variant.predicates[rng.index(variant.predicates.size())];
            const auto range = storedRange(db, p.column);
            p.value = rng.uniformInt(range.min, range.max);
            break;
          }
          case kAdd:
            variant.predicates.push_back(randomPredicate(db, addable[rng.index(addable.size())], rng));
            break;
        }
      }
      variant = canonicalize(variant);
    }
    // Single-valued columns with no other freedom can defeat every attempt.
    check(!(variant == q), ErrorKind::kEmptyPerturbation, "no distinct perturbation found for " + toSql(q));
    out.push_back(std::move(variant));
  }
  return out;
}

std::vector<std::pair<Query, Query>> pairQueries(
    const std::vector<Query>& initial,
    const std::vector<std::vector<Query>>& perturbed,
    const GenConfig& cfg,
    Rng& rng) {
  check(initial.size() == perturbed.size(), ErrorKind::kConfig, "perturbation groups do not match initial queries");
  std::set<std::pair<Query, Query>> seen;
  std::vector<std::pair<Query, Query>> out;
  auto emit = [&](const Query& a, const Query& b) {
    if (!sameFrom(a, b)) {
      return;
    }
    auto pair = std::make_pair(canonicalize(a), canonicalize(b));
    if (seen.insert(pair).second) {
      out.push_back(std::move(pair));
    }
  };

  std::map<std::string, std::vector<const Query*>> byFrom;
  for (std::size_t i = 0; i < initial.size(); ++i) {
    byFrom[fromKey(initial[i])].push_back(&initial[i]);
    for (const auto& p : perturbed[i]) {
      byFrom[fromKey(p)].push_back(&p);
    }
  }

  for (std::size_t i = 0; i < initial.size(); ++i) {
    const auto& group = perturbed[i];
    for (std::size_t k = 0; k < group.size(); ++k) {
      emit(initial[i], group[k]);
      emit(group[k], initial[i]);
      if (k + 1 < group.size()) {
        emit(group[k], group[k + 1]);
      }
    }
    const auto& pool = byFrom[fromKey(initial[i])];
    for (std::size_t c = 0; c < cfg.crossPairsPerQuery && pool.size() > 1; ++c) {
      const Query* partner = pool[rng.index(pool.size())];
      if (partner != &initial[i]) {
        emit(initial[i], *partner);
      }
    }
  }
  return out;
}

std::vector<LabeledPair> labelPairs(const std::vector<std::pair<Query, Query>>& pairs, const Database& db) {
  std::vector<LabeledPair> out;
  out.reserve(pairs.size());
  for (const auto& [q1, q2] : pairs) {
    out.push_back({q1, q2, trueContainmentRate(q1, q2, db)});
  }
  return out;
}

PairSplit splitTrainValidation(std::vector<LabeledPair> pairs, Rng& rng) {
  rng.shuffle(std::span<LabeledPair>(pairs));
  const std::size_t trainCount = (pairs.size() * 4) / 5;
  PairSplit split;
  split.train.assign(std::make_move_iterator(pairs.begin()), std::make_move_iterator(pairs.begin() + trainCount));
  split.validation.assign(std::make_move_iterator(pairs.begin() + trainCount), std::make_move_iterator(pairs.end()));
  return split;
}

std::vector<LabeledPair> genPairWorkload(const GenConfig& cfg, const Database& db, std::size_t numPairs) {
  validate(cfg);
  Rng rng(deriveSeed(cfg.seed, "gen"));
  std::vector<std::pair<Query, Query>> pairs;
  std::set<std::pair<std::string, std::string>> seen;
  std::map<std::string, bool> nonEmpty;
  auto keep = [&](const Query& q1) {
    if (!cfg.nonEmptyOnly) {
      return true;
    }
    auto [it, inserted] = nonEmpty.try_emplace(toSql(q1), false);
    if (inserted) {
      it->second = cardinality(q1, db) > 0;
    }
    return it->second;
  };
  for (int round = 0; pairs.size() < numPairs; ++round) {
    check(round < 1000, ErrorKind::kConfig, "generator cannot produce enough distinct pairs");
    const auto initial = genInitialQueries(cfg, db, rng);
    std::vector<std::vector<Query>> perturbed;
    perturbed.reserve(initial.size());
    for (const auto& q : initial) {
      perturbed.push_back(perturb(q, db, cfg.perturbationsPerQuery, rng));
    }
    for (auto& pair : pairQueries(initial, perturbed, cfg, rng)) {
      if (keep(pair.first) && seen.insert({toSql(pair.first), toSql(pair.second)}).second) {
        pairs.push_back(std::move(pair));
      }
    }
  }
  rng.shuffle(std::span<std::pair<Query, Query>>(pairs));
  pairs.resize(numPairs);
  return labelPairs(pairs, db);
}

std::vector<LabeledQuery> genQueryWorkload(const GenConfig& cfg, const Database& db, std::size_t numQueries) {
  validate(cfg);
  Rng rng(deriveSeed(cfg.seed, "gen"));
  std::vector<LabeledQuery> out;
  std::set<std::string> seen;
  for (int round = 0; out.size() < numQueries; ++round) {
    check(round < 1000, ErrorKind::kConfig, "generator cannot produce enough distinct queries");
    for (auto& q : genInitialQueries(cfg, db, rng)) {
      if (out.size() < numQueries && seen.insert(toSql(q)).second) {
        const auto card = cardinality(q, db);
        if (card > 0 || !cfg.nonEmptyOnly) {
          out.push_back({std::move(q), card});
        }
      }
    }
  }
  return out;
}

std::vector<LabeledQuery> genPoolQueries(const GenConfig& cfg, const Database& db, std::size_t numQueries, bool coverage) {
  const Schema& schema = db.schema();
  Rng rng(deriveSeed(cfg.seed, "pool"));
  const auto sets = connectedTableSets(schema, cfg.maxJoins + 1);
  check(!sets.empty(), ErrorKind::kConfig, "schema has no tables");
  std::vector<LabeledQuery> out;
  out.reserve(numQueries);
  std::set<std::string> seen;
  for (std::size_t i = 0; i < numQueries; ++i) {
    const auto& tables = sets[i % sets.size()];
    Query q = queryForTables(schema, tables);
    const bool bare = coverage && i < sets.size();
    std::uint64_t card = 0;
    if (bare) {
      card = cardinality(q, db);
    } else {
      // Retry for a query not already in the pool (and nonempty when asked).
      Query candidate = q;
      for (int attempt = 0; attempt < 64; ++attempt) {
        candidate = q;
        addRandomPredicates(candidate, db, rng);
        if (seen.contains(toSql(candidate))) {
          continue;
        }
        if (!cfg.nonEmptyOnly || cardinality(candidate, db) > 0) {
          break;
        }
      }
      q = std::move(candidate);
      card = cardinality(q, db);
    }
    seen.insert(toSql(q));
    out.push_back({std::move(q), card});
  }
  return out;
}

} // namespace cntcard
