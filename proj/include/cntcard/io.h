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

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cntcard/crn.h"
#include "cntcard/estimators.h"
#include "cntcard/featurizer.h"
#include "cntcard/qgen.h"
#include "cntcard/query.h"
#include "cntcard/relstore.h"

namespace cntcard {

using Json = nlohmann::json;

// Schema: {tables:[{name, key_cols:[...], cols:[{name,min,max}]}], join_edges:[["A.id","B.a_id"]]}
Json schemaToJson(const Schema& schema);
Schema schemaFromJson(const Json& j);
Schema loadSchema(const std::filesystem::path& path);

// Query: {tables:[...], joins:[["A.id","B.a_id"]], preds:[["A.x","<",5]]}
Json queryToJson(const Query& q);
Query queryFromJson(const Json& j);

/// Writes manifest.json plus one <table>.jsonl per table (one JSON array per
/// row). `provenance` is stored verbatim in the manifest.
void saveDatabase(const Database& db, const std::filesystem::path& dir, const Json& provenance = Json::object());
Database loadDatabase(const std::filesystem::path& dir);

/// JSON-lines workload: a header object, then one record per line.
template <typename Item>
struct Workload {
  Json header;
  std::vector<Item> items;
};

void savePairs(const std::filesystem::path& path, const std::vector<LabeledPair>& pairs, Json header);
Workload<LabeledPair> loadPairs(const std::filesystem::path& path);
void saveQueries(const std::filesystem::path& path, const std::vector<LabeledQuery>& queries, Json header);
Workload<LabeledQuery> loadQueries(const std::filesystem::path& path);

/// Pool file: header {kind, epsilon, final_fn, trim_per_tail, schema_hash}
/// followed by {query, cardinality} lines.
void savePool(const std::filesystem::path& path, const QueriesPool& pool, const std::string& schemaHash,
              const Json& provenance = Json::object());
QueriesPool loadPool(const std::filesystem::path& path, std::string* schemaHash = nullptr);

struct Checkpoint {
  FeatureSpace space;
  CrnParams params;
  Json metadata = Json::object();
};

Json checkpointToJson(const Checkpoint& checkpoint);
Checkpoint checkpointFromJson(const Json& j);
void saveCheckpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
/// Throws a config error when expectedSchemaHash is given and differs.
Checkpoint loadCheckpoint(const std::filesystem::path& path,
                          const std::optional<std::string>& expectedSchemaHash = std::nullopt);

/// Number of learned scalars stored in a serialized checkpoint.
std::size_t countCheckpointScalars(const Json& checkpoint);

/// epoch,validation_mean_qerror; epoch 0 is the untrained model.
void writeTrainReportCsv(std::ostream& out, const TrainReport& report);

Json readJsonFile(const std::filesystem::path& path);
void writeTextFile(const std::filesystem::path& path, const std::string& text);

} // namespace cntcard
