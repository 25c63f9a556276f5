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

#include "cntcard/io.h"

#include <fstream>
#include <sstream>

#include "cntcard/error.h"
#include "cntcard/evalharness.h"

namespace cntcard {

namespace fs = std::filesystem;

namespace {

template <typename Fn>
auto parsing(const std::string& what, Fn&& fn) {
  try {
    return fn();
  } catch (const Json::exception& e) {
    fail(ErrorKind::kIo, "malformed " + what + ": " + e.what());
  }
}

std::ifstream openIn(const fs::path& path) {
  std::ifstream in(path);
  check(in.good(), ErrorKind::kIo, "cannot open '" + path.string() + "'");
  return in;
}

std::ofstream openOut(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  check(out.good(), ErrorKind::kIo, "cannot write '" + path.string() + "'");
  return out;
}

std::vector<Json> readJsonLines(const fs::path& path) {
  auto in = openIn(path);
  std::vector<Json> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    lines.push_back(parsing(path.string(), [&] { return Json::parse(line); }));
  }
  return lines;
}

} // namespace

Json readJsonFile(const fs::path& path) {
  auto in = openIn(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parsing(path.string(), [&] { return Json::parse(buf.str()); });
}

void writeTextFile(const fs::path& path, const std::string& text) {
  auto out = openOut(path);
  out << text;
  check(out.good(), ErrorKind::kIo, "failed writing '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// Schema and queries

Json schemaToJson(const Schema& schema) {
  Json tables = Json::array();
  for (const auto& t : schema.tables()) {
    Json cols = Json::array();
    for (const auto& c : t.cols) {
      cols.push_back({{"name", c.name}, {"min", c.min}, {"max", c.max}});
    }
    tables.push_back({{"name", t.name}, {"key_cols", t.keyCols}, {"cols", cols}});
  }
  Json edges = Json::array();
  for (const auto& e : schema.joinEdges()) {
    edges.push_back({e.left.qualified(), e.right.qualified()});
  }
  return {{"tables", tables}, {"join_edges", edges}};
}

Schema schemaFromJson(const Json& j) {
  std::vector<TableDef> tables;
  std::vector<JoinEdge> edges;
  parsing("schema", [&] {
    for (const auto& t : j.at("tables")) {
      TableDef def;
      def.name = t.at("name").get<std::string>();
      def.keyCols = t.value("key_cols", std::vector<std::string>{});
      for (const auto& c : t.value("cols", Json::array())) {
        def.cols.push_back({c.at("name").get<std::string>(), c.at("min").get<std::int64_t>(),
                            c.at("max").get<std::int64_t>()});
      }
      tables.push_back(std::move(def));
    }
    for (const auto& e : j.value("join_edges", Json::array())) {
      check(e.is_array() && e.size() == 2, ErrorKind::kSchema, "join edge must be a pair");
      edges.push_back({ColumnRef::parse(e[0].get<std::string>()), ColumnRef::parse(e[1].get<std::string>())});
    }
    return 0;
  });
  try {
    return Schema::create(std::move(tables), std::move(edges));
  } catch (const Error& e) {
    // Malformed references inside a schema are schema errors, not query errors.
    fail(ErrorKind::kSchema, e.what());
  }
}

Schema loadSchema(const fs::path& path) {
  check(fs::exists(path), ErrorKind::kConfig, "schema file '" + path.string() + "' does not exist");
  return schemaFromJson(readJsonFile(path));
}

Json queryToJson(const Query& raw) {
  const Query q = canonicalize(raw);
  Json joins = Json::array();
  for (const auto& jn : q.joins) {
    joins.push_back({jn.left.qualified(), jn.right.qualified()});
  }
  Json preds = Json::array();
  for (const auto& p : q.predicates) {
    preds.push_back({p.column.qualified(), std::string(opSymbol(p.op)), p.value});
  }
  return {{"tables", q.tables}, {"joins", joins}, {"preds", preds}};
}

Query queryFromJson(const Json& j) {
  return parsing("query", [&] {
    Query q;
    q.tables = j.at("tables").get<std::vector<std::string>>();
    for (const auto& jn : j.value("joins", Json::array())) {
      q.joins.push_back({ColumnRef::parse(jn.at(0).get<std::string>()), ColumnRef::parse(jn.at(1).get<std::string>())});
    }
    for (const auto& p : j.value("preds", Json::array())) {
      q.predicates.push_back({ColumnRef::parse(p.at(0).get<std::string>()), parseOp(p.at(1).get<std::string>()),
                              p.at(2).get<std::int64_t>()});
    }
    return canonicalize(q);
  });
}

// ---------------------------------------------------------------------------
// Database dump

void saveDatabase(const Database& db, const fs::path& dir, const Json& provenance) {
  fs::create_directories(dir);
  const Schema& schema = db.schema();
  Json tables = Json::array();
  for (std::size_t t = 0; t < schema.tables().size(); ++t) {
    const auto& name = schema.tables()[t].name;
    const std::string file = name + ".jsonl";
    auto out = openOut(dir / file);
    const auto& data = db.table(t);
    for (std::size_t r = 0; r < data.rowCount(); ++r) {
      auto row = data.row(r);
      out << Json(std::vector<std::int64_t>(row.begin(), row.end())).dump() << "\n";
    }
    check(out.good(), ErrorKind::kIo, "failed writing '" + (dir / file).string() + "'");
    tables.push_back({{"name", name}, {"file", file}, {"rows", data.rowCount()}});
  }
  Json manifest = {{"format", "cntcard-db"},
                   {"version", 1},
                   {"schema", schemaToJson(schema)},
                   {"schema_hash", schema.hash()},
                   {"tables", tables},
                   {"provenance", provenance}};
  writeTextFile(dir / "manifest.json", manifest.dump(2) + "\n");
}

Database loadDatabase(const fs::path& dir) {
  check(fs::exists(dir / "manifest.json"), ErrorKind::kConfig,
        "database directory '" + dir.string() + "' has no manifest.json");
  const Json manifest = readJsonFile(dir / "manifest.json");
  Schema schema = schemaFromJson(manifest.at("schema"));
  check(manifest.value("schema_hash", "") == schema.hash(), ErrorKind::kIo, "manifest schema hash mismatch");
  std::vector<TableData> tables(schema.tables().size());
  parsing("manifest", [&] {
    for (const auto& entry : manifest.at("tables")) {
      const auto name = entry.at("name").get<std::string>();
      auto idx = schema.tableIndex(name);
      check(idx.has_value(), ErrorKind::kIo, "manifest lists unknown table '" + name + "'");
      auto& data = tables[*idx];
      data.width = schema.tables()[*idx].width();
      for (const auto& row : readJsonLines(dir / entry.at("file").get<std::string>())) {
        auto values = row.get<std::vector<std::int64_t>>();
        check(values.size() == data.width, ErrorKind::kIo, "row width mismatch in '" + name + "'");
        data.values.insert(data.values.end(), values.begin(), values.end());
      }
      check(data.rowCount() == entry.at("rows").get<std::size_t>(), ErrorKind::kIo,
            "row count mismatch in '" + name + "'");
    }
    return 0;
  });
  for (std::size_t t = 0; t < tables.size(); ++t) {
    tables[t].width = schema.tables()[t].width();
  }
  return Database(std::move(schema), std::move(tables));
}

// ---------------------------------------------------------------------------
// Workloads

void savePairs(const fs::path& path, const std::vector<LabeledPair>& pairs, Json header) {
  header["kind"] = "pairs";
  header["count"] = pairs.size();
  auto out = openOut(path);
  out << header.dump() << "\n";
  for (const auto& p : pairs) {
    out << Json{{"q1", queryToJson(p.q1)}, {"q2", queryToJson(p.q2)}, {"rate", p.rate}}.dump() << "\n";
  }
  check(out.good(), ErrorKind::kIo, "failed writing '" + path.string() + "'");
}

Workload<LabeledPair> loadPairs(const fs::path& path) {
  check(fs::exists(path), ErrorKind::kConfig, "workload '" + path.string() + "' does not exist");
  auto lines = readJsonLines(path);
  check(!lines.empty() && lines[0].value("kind", "") == "pairs", ErrorKind::kIo,
        "'" + path.string() + "' is not a pair workload");
  Workload<LabeledPair> w;
  w.header = lines[0];
  parsing(path.string(), [&] {
    for (std::size_t i = 1; i < lines.size(); ++i) {
      w.items.push_back({queryFromJson(lines[i].at("q1")), queryFromJson(lines[i].at("q2")),
                         lines[i].at("rate").get<double>()});
    }
    return 0;
  });
  return w;
}

void saveQueries(const fs::path& path, const std::vector<LabeledQuery>& queries, Json header) {
  header["kind"] = "queries";
  header["count"] = queries.size();
  auto out = openOut(path);
  out << header.dump() << "\n";
  for (const auto& q : queries) {
    out << Json{{"query", queryToJson(q.q)}, {"cardinality", q.card}}.dump() << "\n";
  }
  check(out.good(), ErrorKind::kIo, "failed writing '" + path.string() + "'");
}

Workload<LabeledQuery> loadQueries(const fs::path& path) {
  check(fs::exists(path), ErrorKind::kConfig, "workload '" + path.string() + "' does not exist");
  auto lines = readJsonLines(path);
  check(!lines.empty() && lines[0].value("kind", "") == "queries", ErrorKind::kIo,
        "'" + path.string() + "' is not a query workload");
  Workload<LabeledQuery> w;
  w.header = lines[0];
  parsing(path.string(), [&] {
    for (std::size_t i = 1; i < lines.size(); ++i) {
      w.items.push_back({queryFromJson(lines[i].at("query")), lines[i].at("cardinality").get<std::uint64_t>()});
    }
    return 0;
  });
  return w;
}

void savePool(const fs::path& path, const QueriesPool& pool, const std::string& schemaHash, const Json& provenance) {
  Json header = {{"kind", "pool"},
                 {"epsilon", pool.epsilon()},
                 {"final_fn", std::string(finalFunctionName(pool.finalFunction()))},
                 {"trim_per_tail", pool.trimPerTail()},
                 {"schema_hash", schemaHash},
                 {"count", pool.records().size()}};
  if (!provenance.empty()) {
    header["provenance"] = provenance;
  }
  auto out = openOut(path);
  out << header.dump() << "\n";
  for (const auto& r : pool.records()) {
    out << Json{{"query", queryToJson(r.q)}, {"cardinality", r.card}}.dump() << "\n";
  }
  check(out.good(), ErrorKind::kIo, "failed writing '" + path.string() + "'");
}

QueriesPool loadPool(const fs::path& path, std::string* schemaHash) {
  check(fs::exists(path), ErrorKind::kConfig, "pool '" + path.string() + "' does not exist");
  auto lines = readJsonLines(path);
  check(!lines.empty() && lines[0].value("kind", "") == "pool", ErrorKind::kIo,
        "'" + path.string() + "' is not a pool file");
  return parsing(path.string(), [&] {
    const auto& h = lines[0];
    std::vector<LabeledQuery> records;
    for (std::size_t i = 1; i < lines.size(); ++i) {
      records.push_back({queryFromJson(lines[i].at("query")), lines[i].at("cardinality").get<std::uint64_t>()});
    }
    if (schemaHash != nullptr) {
      *schemaHash = h.value("schema_hash", "");
    }
    return QueriesPool(std::move(records), h.at("epsilon").get<double>(),
                       parseFinalFunction(h.at("final_fn").get<std::string>()),
                       h.value("trim_per_tail", kDefaultTrimPerTail));
  });
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr const char* kBlockNames[] = {"U1", "b1", "U2", "b2", "Uout1", "bout1", "Uout2", "bout2"};

std::vector<std::span<const double>> blocks(const CrnParams& p) {
  return {p.u1(), p.b1(), p.u2(), p.b2(), p.uOut1(), p.bOut1(), p.uOut2(), p.bOut2Span()};
}

} // namespace

Json checkpointToJson(const Checkpoint& c) {
  Json columns = Json::array();
  Json ranges = Json::array();
  for (std::size_t i = 0; i < c.space.columns().size(); ++i) {
    columns.push_back(c.space.columns()[i].qualified());
    ranges.push_back({c.space.ranges()[i].min, c.space.ranges()[i].max});
  }
  Json params = Json::object();
  const auto bs = blocks(c.params);
  for (std::size_t b = 0; b < bs.size(); ++b) {
    params[kBlockNames[b]] = std::vector<double>(bs[b].begin(), bs[b].end());
  }
  return {{"format", "cntcard-crn"},
          {"version", 1},
          {"schema_hash", c.space.schemaHash()},
          {"feature_space", {{"tables", c.space.tables()}, {"columns", columns}, {"ranges", ranges}}},
          {"input_width", c.params.inputWidth()},
          {"hidden", c.params.hidden()},
          {"params", params},
          {"metadata", c.metadata}};
}

Checkpoint checkpointFromJson(const Json& j) {
  return parsing("checkpoint", [&] {
    check(j.at("format").get<std::string>() == "cntcard-crn" && j.at("version").get<int>() == 1, ErrorKind::kIo,
          "unsupported checkpoint format");
    const auto& fsj = j.at("feature_space");
    std::vector<ColumnRef> columns;
    std::vector<FeatureSpace::ColumnRange> ranges;
    for (const auto& c : fsj.at("columns")) {
      columns.push_back(ColumnRef::parse(c.get<std::string>()));
    }
    for (const auto& r : fsj.at("ranges")) {
      ranges.push_back({r.at(0).get<std::int64_t>(), r.at(1).get<std::int64_t>()});
    }
    Checkpoint c{FeatureSpace::fromParts(fsj.at("tables").get<std::vector<std::string>>(), std::move(columns),
                                         std::move(ranges), j.at("schema_hash").get<std::string>()),
                 CrnParams::zeros(j.at("input_width").get<std::size_t>(), j.at("hidden").get<std::size_t>()),
                 j.value("metadata", Json::object())};
    check(c.space.width() == c.params.inputWidth(), ErrorKind::kIo, "checkpoint width does not match its feature space");
    auto dst = c.params.values();
    std::size_t offset = 0;
    for (const char* name : kBlockNames) {
      const auto values = j.at("params").at(name).get<std::vector<double>>();
      check(offset + values.size() <= dst.size(), ErrorKind::kIo, std::string("oversized block ") + name);
      std::copy(values.begin(), values.end(), dst.begin() + static_cast<long>(offset));
      offset += values.size();
    }
    check(offset == dst.size(), ErrorKind::kIo, "checkpoint parameter count mismatch");
    check(c.params.allFinite(), ErrorKind::kIo, "checkpoint holds non-finite parameters");
    return c;
  });
}

void saveCheckpoint(const fs::path& path, const Checkpoint& checkpoint) {
  writeTextFile(path, checkpointToJson(checkpoint).dump() + "\n");
}

Checkpoint loadCheckpoint(const fs::path& path, const std::optional<std::string>& expectedSchemaHash) {
  check(fs::exists(path), ErrorKind::kConfig, "checkpoint '" + path.string() + "' does not exist");
  Checkpoint c = checkpointFromJson(readJsonFile(path));
  if (expectedSchemaHash) {
    check(c.space.schemaHash() == *expectedSchemaHash, ErrorKind::kConfig,
          "checkpoint schema hash " + c.space.schemaHash() + " does not match " + *expectedSchemaHash);
  }
  return c;
}

std::size_t countCheckpointScalars(const Json& checkpoint) {
  std::size_t total = 0;
  for (const auto& [name, values] : checkpoint.at("params").items()) {
    total += values.size();
  }
  return total;
}

void writeTrainReportCsv(std::ostream& out, const TrainReport& report) {
  out << "epoch,validation_mean_qerror\n";
  out << "0," << formatDouble(report.initialValidationQError) << "\n";
  for (std::size_t i = 0; i < report.validationCurve.size(); ++i) {
    out << (i + 1) << "," << formatDouble(report.validationCurve[i]) << "\n";
  }
}

} // namespace cntcard
