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

#include "cntcard/relstore.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "cntcard/error.h"
#include "cntcard/rng.h"

namespace cntcard {

// ---------------------------------------------------------------------------
// Schema

ColumnRef ColumnRef::parse(std::string_view text) {
  const auto dot = text.find('.');
  check(dot != std::string_view::npos && dot > 0 && dot + 1 < text.size() &&
            text.find('.', dot + 1) == std::string_view::npos,
        ErrorKind::kQuery, "malformed column reference '" + std::string(text) + "'");
  return {std::string(text.substr(0, dot)), std::string(text.substr(dot + 1))};
}

Schema Schema::create(std::vector<TableDef> tables, std::vector<JoinEdge> joinEdges) {
  Schema s;
  s.tables_ = std::move(tables);
  s.joinEdges_ = std::move(joinEdges);

  std::set<std::string> tableNames;
  for (const auto& t : s.tables_) {
    check(!t.name.empty() && t.name.find('.') == std::string::npos, ErrorKind::kSchema,
          "invalid table name '" + t.name + "'");
    check(tableNames.insert(t.name).second, ErrorKind::kSchema, "duplicate table '" + t.name + "'");
    std::set<std::string> colNames;
    for (const auto& k : t.keyCols) {
      check(!k.empty() && k.find('.') == std::string::npos, ErrorKind::kSchema,
            "invalid column name in '" + t.name + "'");
      check(colNames.insert(k).second, ErrorKind::kSchema,
            "duplicate column '" + t.name + "." + k + "'");
    }
    for (const auto& c : t.cols) {
      check(!c.name.empty() && c.name.find('.') == std::string::npos, ErrorKind::kSchema,
            "invalid column name in '" + t.name + "'");
      check(colNames.insert(c.name).second, ErrorKind::kSchema,
            "duplicate column '" + t.name + "." + c.name + "'");
      check(c.min <= c.max, ErrorKind::kSchema, "column '" + t.name + "." + c.name + "' has min > max");
    }
    for (const auto& k : t.keyCols) {
      s.globalColumns_.push_back({t.name, k});
    }
    for (const auto& c : t.cols) {
      s.globalColumns_.push_back({t.name, c.name});
    }
  }
  std::sort(s.globalColumns_.begin(), s.globalColumns_.end());

  for (const auto& e : s.joinEdges_) {
    for (const auto* col : {&e.left, &e.right}) {
      check(s.tableIndex(col->table).has_value(), ErrorKind::kSchema,
            "join edge references unknown table '" + col->table + "'");
      check(s.isKeyColumn(*col), ErrorKind::kSchema,
            "join edge column '" + col->qualified() + "' is not a key column");
    }
    check(e.left.table != e.right.table, ErrorKind::kSchema,
          "join edge " + e.left.qualified() + " = " + e.right.qualified() + " is within one table");
  }
  // Every foreign key must resolve to a primary key.
  for (const auto& t : s.tables_) {
    for (std::size_t k = 1; k < t.keyCols.size(); ++k) {
      check(s.referencedKey({t.name, t.keyCols[k]}).has_value(), ErrorKind::kSchema,
            "foreign key '" + t.name + "." + t.keyCols[k] + "' references no primary key");
    }
  }

  {
    std::string canon;
    for (const auto& t : s.tables_) {
      canon += "T" + t.name + "(";
      for (const auto& k : t.keyCols) {
        canon += "k:" + k + ";";
      }
      for (const auto& c : t.cols) {
        canon += "c:" + c.name + "[" + std::to_string(c.min) + "," + std::to_string(c.max) + "];";
      }
      canon += ")";
    }
    for (const auto& e : s.joinEdges_) {
      canon += "E" + e.left.qualified() + "=" + e.right.qualified() + ";";
    }
    s.hash_ = toHex(fnv1a64(canon));
  }
  return s;
}

std::optional<std::size_t> Schema::tableIndex(std::string_view name) const {
  for (std::size_t i = 0; i < tables_.size(); ++i) {
    if (tables_[i].name == name) {
      return i;
    }
  }
  return std::nullopt;
}

const TableDef& Schema::table(std::string_view name) const {
  auto idx = tableIndex(name);
  check(idx.has_value(), ErrorKind::kQuery, "unknown table '" + std::string(name) + "'");
  return tables_[*idx];
}

std::optional<std::size_t> Schema::columnPosition(std::size_t tableIdx, std::string_view column) const {
  const auto& t = tables_[tableIdx];
  for (std::size_t i = 0; i < t.keyCols.size(); ++i) {
    if (t.keyCols[i] == column) {
      return i;
    }
  }
  for (std::size_t i = 0; i < t.cols.size(); ++i) {
    if (t.cols[i].name == column) {
      return t.keyCols.size() + i;
    }
  }
  return std::nullopt;
}

std::string Schema::columnName(std::size_t tableIdx, std::size_t position) const {
  const auto& t = tables_[tableIdx];
  return position < t.keyCols.size() ? t.keyCols[position] : t.cols[position - t.keyCols.size()].name;
}

std::optional<std::size_t> Schema::globalIndex(const ColumnRef& column) const {
  auto it = std::lower_bound(globalColumns_.begin(), globalColumns_.end(), column);
  if (it == globalColumns_.end() || *it != column) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(it - globalColumns_.begin());
}

std::optional<ColumnDef> Schema::nonKeyColumn(const ColumnRef& column) const {
  auto idx = tableIndex(column.table);
  if (!idx) {
    return std::nullopt;
  }
  for (const auto& c : tables_[*idx].cols) {
    if (c.name == column.column) {
      return c;
    }
  }
  return std::nullopt;
}

bool Schema::isKeyColumn(const ColumnRef& column) const {
  auto idx = tableIndex(column.table);
  if (!idx) {
    return false;
  }
  const auto& keys = tables_[*idx].keyCols;
  return std::find(keys.begin(), keys.end(), column.column) != keys.end();
}

bool Schema::isJoinEdge(const ColumnRef& a, const ColumnRef& b) const {
  for (const auto& e : joinEdges_) {
    if ((e.left == a && e.right == b) || (e.left == b && e.right == a)) {
      return true;
    }
  }
  return false;
}

std::optional<ColumnRef> Schema::referencedKey(const ColumnRef& foreignKey) const {
  auto isPrimary = [&](const ColumnRef& c) {
    auto idx = tableIndex(c.table);
    return idx && !tables_[*idx].keyCols.empty() && tables_[*idx].keyCols.front() == c.column;
  };
  for (const auto& e : joinEdges_) {
    if (e.left == foreignKey && isPrimary(e.right)) {
      return e.right;
    }
    if (e.right == foreignKey && isPrimary(e.left)) {
      return e.left;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Database

Database::Database(Schema schema, std::vector<TableData> tables)
    : schema_(std::move(schema)), tables_(std::move(tables)) {
  const auto& defs = schema_.tables();
  check(tables_.size() == defs.size(), ErrorKind::kSchema, "table count does not match schema");
  stats_.resize(defs.size());
  for (std::size_t t = 0; t < defs.size(); ++t) {
    const auto& def = defs[t];
    auto& data = tables_[t];
    check(data.width == def.width(), ErrorKind::kSchema, "row width mismatch in '" + def.name + "'");
    check(data.width == 0 || data.values.size() % data.width == 0, ErrorKind::kSchema,
          "ragged rows in '" + def.name + "'");
    const std::size_t rows = data.rowCount();
    stats_[t].resize(def.width());
    for (std::size_t c = 0; c < def.width(); ++c) {
      ColumnStats st;
      st.rows = rows;
      std::unordered_set<std::int64_t> distinct;
      for (std::size_t r = 0; r < rows; ++r) {
        const std::int64_t v = data.values[r * data.width + c];
        if (r == 0) {
          st.min = st.max = v;
        }
        st.min = std::min(st.min, v);
        st.max = std::max(st.max, v);
        distinct.insert(v);
      }
      st.distinct = distinct.size();
      if (c >= def.keyCols.size() && rows > 0) {
        const auto& cd = def.cols[c - def.keyCols.size()];
        check(st.min >= cd.min && st.max <= cd.max, ErrorKind::kSchema,
              "values of '" + def.name + "." + cd.name + "' fall outside the declared range");
      }
      stats_[t][c] = st;
    }
  }
}

std::size_t Database::totalRows() const {
  std::size_t total = 0;
  for (const auto& t : tables_) {
    total += t.rowCount();
  }
  return total;
}

const ColumnStats& Database::stats(const ColumnRef& column) const {
  auto t = schema_.tableIndex(column.table);
  check(t.has_value(), ErrorKind::kQuery, "unknown table '" + column.table + "'");
  auto pos = schema_.columnPosition(*t, column.column);
  check(pos.has_value(), ErrorKind::kQuery, "unknown column '" + column.qualified() + "'");
  return stats_[*t][*pos];
}

Database buildDatabase(
    const Schema& schema,
    const std::map<std::string, std::size_t>& rowCounts,
    std::uint64_t seed,
    const DataGenOptions& options) {
  const auto& defs = schema.tables();
  for (const auto& [name, count] : rowCounts) {
    check(schema.tableIndex(name).has_value(), ErrorKind::kConfig,
          "row count given for unknown table '" + name + "'");
  }

  // Parents are generated before children; foreign-key cycles are rejected.
  std::vector<std::vector<std::size_t>> dependsOn(defs.size());
  for (std::size_t t = 0; t < defs.size(); ++t) {
    for (std::size_t k = 1; k < defs[t].keyCols.size(); ++k) {
      auto ref = schema.referencedKey({defs[t].name, defs[t].keyCols[k]});
      dependsOn[t].push_back(*schema.tableIndex(ref->table));
    }
  }
  std::vector<std::size_t> order;
  std::vector<int> state(defs.size(), 0);
  auto visit = [&](auto&& self, std::size_t t) -> void {
    if (state[t] == 2) {
      return;
    }
    check(state[t] == 0, ErrorKind::kSchema, "foreign-key cycle through '" + defs[t].name + "'");
    state[t] = 1;
    for (auto p : dependsOn[t]) {
      if (p != t) {
        self(self, p);
      }
    }
    state[t] = 2;
    order.push_back(t);
  };
  for (std::size_t t = 0; t < defs.size(); ++t) {
    visit(visit, t);
  }

  std::vector<TableData> tables(defs.size());
  std::vector<std::vector<double>> latents(defs.size());
  for (std::size_t t : order) {
    const auto& def = defs[t];
    auto it = rowCounts.find(def.name);
    const std::size_t n = it == rowCounts.end() ? 0 : it->second;
    Rng rng(deriveSeed(seed, "db/" + def.name));
    auto& data = tables[t];
    data.width = def.width();
    data.values.resize(n * data.width);
    latents[t].resize(n);

    struct ForeignKey {
      std::size_t position;
      std::size_t parent;
      std::size_t parentPosition;
    };
    std::vector<ForeignKey> fks;
    for (std::size_t k = 1; k < def.keyCols.size(); ++k) {
      auto ref = schema.referencedKey({def.name, def.keyCols[k]});
      const std::size_t p = *schema.tableIndex(ref->table);
      check(n == 0 || tables[p].rowCount() > 0, ErrorKind::kConfig,
            "'" + def.name + "' references empty table '" + ref->table + "'");
      fks.push_back({k, p, *schema.columnPosition(p, ref->column)});
    }

    for (std::size_t r = 0; r < n; ++r) {
      std::int64_t* row = data.values.data() + r * data.width;
      if (!def.keyCols.empty()) {
        row[0] = static_cast<std::int64_t>(r) + 1;
      }
      double latent = 0.5 * (static_cast<double>(r) / static_cast<double>(n)) + 0.5 * rng.uniform();
      for (std::size_t f = 0; f < fks.size(); ++f) {
        const auto& fk = fks[f];
        const std::size_t np = tables[fk.parent].rowCount();
        auto j = static_cast<std::size_t>(std::pow(rng.uniform(), options.fkSkew) * static_cast<double>(np));
        j = std::min(j, np - 1);
        row[fk.position] = tables[fk.parent].values[j * tables[fk.parent].width + fk.parentPosition];
        if (f == 0) {
          latent = options.inheritance * latents[fk.parent][j] + (1.0 - options.inheritance) * rng.uniform();
        }
      }
      latents[t][r] = latent;
      for (std::size_t c = 0; c < def.cols.size(); ++c) {
        const auto& cd = def.cols[c];
        const double mix = options.correlation * latent + (1.0 - options.correlation) * rng.uniform();
        const double span = static_cast<double>(cd.max - cd.min) + 1.0;
        auto offset = static_cast<std::int64_t>(std::floor(mix * span));
        row[def.keyCols.size() + c] = std::clamp(cd.min + offset, cd.min, cd.max);
      }
    }
  }
  return Database(schema, std::move(tables));
}

// ---------------------------------------------------------------------------
// Execution

namespace {

struct BoundPredicate {
  std::size_t position;
  CompareOp op;
  std::int64_t value;
};

struct BoundJoin {
  std::size_t slotA;
  std::size_t posA;
  std::size_t slotB;
  std::size_t posB;
};

/// A validated query resolved against physical positions. Slots follow the
/// canonical (sorted) table order.
struct BoundQuery {
  std::vector<std::size_t> tableOfSlot;
  std::vector<std::vector<BoundPredicate>> predicates;
  std::vector<BoundJoin> joins;
  /// Rows of each slot that pass that slot's predicates.
  std::vector<std::vector<std::size_t>> candidates;
};

BoundQuery bind(const Query& raw, const Database& db) {
  const Schema& schema = db.schema();
  validate(raw, schema);
  const Query q = canonicalize(raw);
  BoundQuery b;
  auto slotOf = [&](const std::string& table) {
    return static_cast<std::size_t>(std::lower_bound(q.tables.begin(), q.tables.end(), table) - q.tables.begin());
  };
  for (const auto& name : q.tables) {
    b.tableOfSlot.push_back(*schema.tableIndex(name));
  }
  b.predicates.resize(q.tables.size());
  for (const auto& p : q.predicates) {
    const std::size_t slot = slotOf(p.column.table);
    b.predicates[slot].push_back({*schema.columnPosition(b.tableOfSlot[slot], p.column.column), p.op, p.value});
  }
  for (const auto& j : q.joins) {
    const std::size_t a = slotOf(j.left.table);
    const std::size_t c = slotOf(j.right.table);
    b.joins.push_back({a, *schema.columnPosition(b.tableOfSlot[a], j.left.column), c,
                       *schema.columnPosition(b.tableOfSlot[c], j.right.column)});
  }
  b.candidates.resize(q.tables.size());
  for (std::size_t s = 0; s < q.tables.size(); ++s) {
    const auto& data = db.table(b.tableOfSlot[s]);
    for (std::size_t r = 0; r < data.rowCount(); ++r) {
      auto row = data.row(r);
      bool keep = true;
      for (const auto& p : b.predicates[s]) {
        if (!evalOp(p.op, row[p.position], p.value)) {
          keep = false;
          break;
        }
      }
      if (keep) {
        b.candidates[s].push_back(r);
      }
    }
  }
  return b;
}

/// Slots in BFS order over the join graph, each (after the first) with the
/// join that attaches it to an earlier slot and the remaining joins to check.
struct JoinPlan {
  struct Step {
    std::size_t slot;
    std::size_t ownPos = 0;
    std::size_t anchorSlot = 0;
    std::size_t anchorPos = 0;
    std::vector<BoundJoin> extra;
  };
  std::vector<Step> steps;
};

JoinPlan planJoins(const BoundQuery& b) {
  const std::size_t n = b.tableOfSlot.size();
  JoinPlan plan;
  std::vector<bool> placed(n, false);
  std::vector<bool> joinUsed(b.joins.size(), false);
  plan.steps.emplace_back();
  placed[0] = true;
  while (plan.steps.size() < n) {
    bool progressed = false;
    for (std::size_t ji = 0; ji < b.joins.size() && !progressed; ++ji) {
      const auto& j = b.joins[ji];
      if (placed[j.slotA] == placed[j.slotB]) {
        continue;
      }
      JoinPlan::Step step;
      if (placed[j.slotA]) {
        step = {j.slotB, j.posB, j.slotA, j.posA, {}};
      } else {
        step = {j.slotA, j.posA, j.slotB, j.posB, {}};
      }
      joinUsed[ji] = true;
      placed[step.slot] = true;
      for (std::size_t ki = 0; ki < b.joins.size(); ++ki) {
        const auto& k = b.joins[ki];
        if (!joinUsed[ki] && placed[k.slotA] && placed[k.slotB]) {
          joinUsed[ki] = true;
          step.extra.push_back(k);
        }
      }
      plan.steps.push_back(std::move(step));
      progressed = true;
    }
    check(progressed, ErrorKind::kQuery, "join graph is not connected");
  }
  return plan;
}

using ValueIndex = std::unordered_map<std::int64_t, std::vector<std::size_t>>;

/// Enumerates every result tuple as one row id per slot.
template <typename Visit>
void enumerate(const BoundQuery& b, const Database& db, Visit&& visit) {
  const JoinPlan plan = planJoins(b);
  const std::size_t n = plan.steps.size();
  std::vector<ValueIndex> indexes(n);
  for (std::size_t i = 1; i < n; ++i) {
    const auto& step = plan.steps[i];
    const auto& data = db.table(b.tableOfSlot[step.slot]);
    for (auto r : b.candidates[step.slot]) {
      indexes[i][data.row(r)[step.ownPos]].push_back(r);
    }
  }
  std::vector<std::size_t> current(n);
  auto value = [&](std::size_t slot, std::size_t pos) {
    return db.table(b.tableOfSlot[slot]).row(current[slot])[pos];
  };
  auto recurse = [&](auto&& self, std::size_t depth) -> void {
    if (depth == n) {
      visit(current);
      return;
    }
    const auto& step = plan.steps[depth];
    auto it = indexes[depth].find(value(step.anchorSlot, step.anchorPos));
    if (it == indexes[depth].end()) {
      return;
    }
    for (auto r : it->second) {
      current[step.slot] = r;
      bool ok = true;
      for (const auto& k : step.extra) {
        if (value(k.slotA, k.posA) != value(k.slotB, k.posB)) {
          ok = false;
          break;
        }
      }
      if (ok) {
        self(self, depth + 1);
      }
    }
  };
  for (auto r : b.candidates[plan.steps[0].slot]) {
    current[plan.steps[0].slot] = r;
    recurse(recurse, 1);
  }
}

} // namespace

ResultSet execute(const Query& q, const Database& db) {
  const BoundQuery b = bind(q, db);
  const Schema& schema = db.schema();
  ResultSet result;
  for (auto t : b.tableOfSlot) {
    for (std::size_t c = 0; c < schema.tables()[t].width(); ++c) {
      result.columns.push_back({schema.tables()[t].name, schema.columnName(t, c)});
    }
  }
  enumerate(b, db, [&](const std::vector<std::size_t>& rowIds) {
    std::vector<std::int64_t> tuple;
    tuple.reserve(result.columns.size());
    for (std::size_t s = 0; s < rowIds.size(); ++s) {
      auto row = db.table(b.tableOfSlot[s]).row(rowIds[s]);
      tuple.insert(tuple.end(), row.begin(), row.end());
    }
    result.rows.push_back(std::move(tuple));
  });
  std::sort(result.rows.begin(), result.rows.end());
  result.rows.erase(std::unique(result.rows.begin(), result.rows.end()), result.rows.end());
  return result;
}

std::uint64_t cardinality(const Query& q, const Database& db) {
  const BoundQuery b = bind(q, db);
  const std::size_t n = b.tableOfSlot.size();
  if (b.joins.size() + 1 != n) {
    // Cyclic join graph: fall back to enumeration.
    std::uint64_t count = 0;
    enumerate(b, db, [&](const std::vector<std::size_t>&) { ++count; });
    return count;
  }

  // Acyclic: bottom-up counting over the join tree rooted at the first step.
  const JoinPlan plan = planJoins(b);
  std::vector<std::vector<std::uint64_t>> weight(n);
  for (std::size_t s = 0; s < n; ++s) {
    weight[s].assign(b.candidates[s].size(), 1);
  }
  for (std::size_t i = n; i-- > 1;) {
    const auto& step = plan.steps[i];
    const auto& child = db.table(b.tableOfSlot[step.slot]);
    std::unordered_map<std::int64_t, std::uint64_t> sums;
    for (std::size_t c = 0; c < b.candidates[step.slot].size(); ++c) {
      sums[child.row(b.candidates[step.slot][c])[step.ownPos]] += weight[step.slot][c];
    }
    const auto& parent = db.table(b.tableOfSlot[step.anchorSlot]);
    for (std::size_t c = 0; c < b.candidates[step.anchorSlot].size(); ++c) {
      auto it = sums.find(parent.row(b.candidates[step.anchorSlot][c])[step.anchorPos]);
      weight[step.anchorSlot][c] *= it == sums.end() ? 0 : it->second;
    }
  }
  const auto& root = weight[plan.steps[0].slot];
  return std::accumulate(root.begin(), root.end(), std::uint64_t{0});
}

double trueContainmentRate(const Query& q1, const Query& q2, const Database& db) {
  check(sameFrom(q1, q2), ErrorKind::kContainmentDomain,
        "containment needs identical FROM clauses: {" + fromKey(q1) + "} vs {" + fromKey(q2) + "}");
  const std::uint64_t base = cardinality(q1, db);
  if (base == 0) {
    return 0.0;
  }
  const std::uint64_t shared = cardinality(intersect(q1, q2), db);
  return static_cast<double>(shared) / static_cast<double>(base);
}

} // namespace cntcard
