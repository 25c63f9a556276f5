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

// Command-line entry point. Every subcommand echoes its configuration as JSON
// on stderr together with the configuration hash, and writes only
// deterministic content to its output files.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cntcard/crn.h"
#include "cntcard/error.h"
#include "cntcard/estimators.h"
#include "cntcard/evalharness.h"
#include "cntcard/io.h"
#include "cntcard/pipeline.h"
#include "cntcard/qgen.h"
#include "cntcard/relstore.h"
#include "cntcard/rng.h"

namespace fs = std::filesystem;
using namespace cntcard;

namespace {

std::string configHash(const Json& config) {
  return toHex(fnv1a64(config.dump()));
}

/// Prints the config echo and returns the provenance block stored with outputs.
Json announce(const std::string& command, const Json& config, const std::string& schemaHash) {
  Json provenance = {{"command", command}, {"config", config}, {"config_hash", configHash(config)}};
  if (!schemaHash.empty()) {
    provenance["schema_hash"] = schemaHash;
  }
  std::cerr << provenance.dump() << std::endl;
  return provenance;
}

/// Result CSVs get a sidecar with the config, seed and schema hash.
void writeCsv(const fs::path& path, const std::string& csv, const Json& provenance) {
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  writeTextFile(path, csv);
  writeTextFile(fs::path(path.string() + ".meta.json"), provenance.dump(2) + "\n");
}

std::vector<std::size_t> parseSizeList(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      check(used == item.size() && v > 0, ErrorKind::kConfig, "bad list entry '" + item + "'");
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::logic_error&) {
      fail(ErrorKind::kConfig, "bad list entry '" + item + "'");
    }
  }
  check(!out.empty(), ErrorKind::kConfig, "empty list '" + text + "'");
  return out;
}

std::map<std::string, std::size_t> parseTableRows(const std::vector<std::string>& entries) {
  std::map<std::string, std::size_t> out;
  for (const auto& e : entries) {
    const auto eq = e.find('=');
    check(eq != std::string::npos, ErrorKind::kConfig, "expected table=rows, got '" + e + "'");
    out[e.substr(0, eq)] = parseSizeList(e.substr(eq + 1)).front();
  }
  return out;
}

// --- gen-db ----------------------------------------------------------------

struct GenDbArgs {
  std::string schema;
  std::string out;
  std::size_t rows = 1000;
  std::vector<std::string> tableRows;
  std::uint64_t seed = 0;
  DataGenOptions options;
};

int runGenDb(const GenDbArgs& a) {
  const Schema schema = loadSchema(a.schema);
  const auto counts = rowCountsFor(schema, a.rows, parseTableRows(a.tableRows));
  const Json config = {{"schema", a.schema},
                       {"rows", counts},
                       {"seed", a.seed},
                       {"correlation", a.options.correlation},
                       {"fk_skew", a.options.fkSkew},
                       {"inheritance", a.options.inheritance}};
  const Json provenance = announce("gen-db", config, schema.hash());
  const Database db = buildDatabase(schema, counts, deriveSeed(a.seed, "db"), a.options);
  saveDatabase(db, a.out, provenance);
  std::size_t total = 0;
  for (std::size_t t = 0; t < schema.tables().size(); ++t) {
    total += db.rowCount(t);
  }
  std::cout << "wrote " << total << " rows in " << schema.tables().size() << " tables to " << a.out << "\n";
  return 0;
}

// --- gen-workload ------------------------------------------------------------

struct GenWorkloadArgs {
  std::string db;
  std::string out;
  std::string kind = "pairs";
  std::size_t n = 1000;
  std::size_t maxJoins = 2;
  std::size_t initial = 100;
  std::size_t perturbations = 4;
  std::size_t crossPairs = 2;
  bool balanceJoins = false;
  bool allowEmpty = false;
  bool nonEmpty = false;
  bool noCoverage = false;
  std::uint64_t seed = 0;
};

int runGenWorkload(const GenWorkloadArgs& a) {
  const Database db = loadDatabase(a.db);
  GenConfig cfg;
  cfg.maxJoins = a.maxJoins;
  cfg.numInitial = a.initial;
  cfg.perturbationsPerQuery = a.perturbations;
  cfg.crossPairsPerQuery = a.crossPairs;
  cfg.balanceJoins = a.balanceJoins;
  cfg.nonEmptyOnly = a.kind == "pairs" ? a.nonEmpty : !a.allowEmpty;
  cfg.seed = a.seed;
  validate(cfg);
  Json config = {{"db", a.db},
                 {"kind", a.kind},
                 {"n", a.n},
                 {"max_joins", a.maxJoins},
                 {"initial", a.initial},
                 {"perturbations", a.perturbations},
                 {"cross_pairs", a.crossPairs},
                 {"balance_joins", a.balanceJoins},
                 {"non_empty_only", cfg.nonEmptyOnly},
                 {"seed", a.seed}};
  if (a.kind == "pool") {
    config["coverage"] = !a.noCoverage;
  }
  const Json provenance = announce("gen-workload", config, db.schema().hash());
  if (a.kind == "pairs") {
    const auto pairs = genPairWorkload(cfg, db, a.n);
    savePairs(a.out, pairs, provenance);
  } else if (a.kind == "queries") {
    saveQueries(a.out, genQueryWorkload(cfg, db, a.n), provenance);
  } else {
    saveQueries(a.out, genPoolQueries(cfg, db, a.n, !a.noCoverage), provenance);
  }
  std::cout << "wrote " << a.n << " " << a.kind << " to " << a.out << "\n";
  return 0;
}

// --- training --------------------------------------------------------------

struct TrainArgs {
  std::string db;
  std::string pairs;
  std::string validation;
  std::string out;
  std::string report;
  TrainConfig cfg;
  std::uint64_t seed = 0;
};

Json trainConfigJson(const TrainArgs& a) {
  return {{"db", a.db},
          {"pairs", a.pairs},
          {"validation", a.validation},
          {"hidden", a.cfg.hidden},
          {"batch", a.cfg.batchSize},
          {"lr", a.cfg.learningRate},
          {"epochs", a.cfg.maxEpochs},
          {"patience", a.cfg.patience},
          {"label_floor", a.cfg.labelFloor},
          {"seed", a.seed}};
}

/// Validation pairs come from their own file or from an 80/20 split.
PairSplit loadTrainingData(const TrainArgs& a) {
  auto pairs = loadPairs(a.pairs).items;
  check(!pairs.empty(), ErrorKind::kConfig, "training workload is empty");
  if (!a.validation.empty()) {
    return {std::move(pairs), loadPairs(a.validation).items};
  }
  Rng rng(deriveSeed(a.seed, "split"));
  return splitTrainValidation(std::move(pairs), rng);
}

TrainResult trainModel(const FeatureSpace& space, const PairSplit& data, TrainConfig cfg, std::uint64_t seed) {
  check(!data.validation.empty(), ErrorKind::kConfig, "validation workload is empty");
  cfg.seed = deriveSeed(seed, "train");
  validate(cfg);
  const auto trainSet = makeExamples(data.train, space);
  const auto validationSet = makeExamples(data.validation, space);
  return train(space.width(), trainSet, validationSet, cfg);
}

int runTrain(const TrainArgs& a) {
  const Database db = loadDatabase(a.db);
  const FeatureSpace space = FeatureSpace::build(db.schema());
  const Json provenance = announce("train", trainConfigJson(a), db.schema().hash());
  const PairSplit data = loadTrainingData(a);
  const auto result = trainModel(space, data, a.cfg, a.seed);

  Json metadata = provenance;
  metadata["train_pairs"] = data.train.size();
  metadata["validation_pairs"] = data.validation.size();
  metadata["initial_validation_qerror"] = result.report.initialValidationQError;
  metadata["best_validation_qerror"] = result.report.bestValidationQError;
  metadata["best_epoch"] = result.report.bestEpoch;
  metadata["epochs_run"] = result.report.validationCurve.size();
  saveCheckpoint(a.out, {space, result.params, metadata});
  if (!a.report.empty()) {
    std::ostringstream csv;
    writeTrainReportCsv(csv, result.report);
    writeCsv(a.report, csv.str(), provenance);
  }
  std::cout << "validation mean q-error " << formatDouble(result.report.initialValidationQError) << " -> "
            << formatDouble(result.report.bestValidationQError) << " at epoch " << result.report.bestEpoch << " of "
            << result.report.validationCurve.size() << "\n";
  std::cerr << "wall time " << result.report.wallSeconds << " s" << std::endl;
  return 0;
}

struct SweepArgs {
  TrainArgs train;
  std::string test;
  std::string hiddenValues = "16,32,64,128";
  std::string out;
};

int runSweepH(const SweepArgs& a) {
  const Database db = loadDatabase(a.train.db);
  const FeatureSpace space = FeatureSpace::build(db.schema());
  const auto hidden = parseSizeList(a.hiddenValues);
  Json config = trainConfigJson(a.train);
  config.erase("hidden");
  config["hidden_values"] = hidden;
  config["test"] = a.test;
  const Json provenance = announce("sweep-h", config, db.schema().hash());
  const PairSplit data = loadTrainingData(a.train);
  const auto test = loadPairs(a.test).items;
  check(!test.empty(), ErrorKind::kConfig, "test workload is empty");

  std::ostringstream csv;
  csv << "hidden,parameters,best_epoch,best_validation_mean,test_p50,test_p90,test_mean\n";
  for (std::size_t h : hidden) {
    TrainConfig cfg = a.train.cfg;
    cfg.hidden = h;
    const auto result = trainModel(space, data, cfg, a.train.seed);
    const auto eval = evalContainment(CrnContainment(result.params, space), test, cfg.labelFloor);
    csv << h << "," << result.params.size() << "," << result.report.bestEpoch << ","
        << formatDouble(result.report.bestValidationQError) << "," << formatDouble(eval.stats.p50) << ","
        << formatDouble(eval.stats.p90) << "," << formatDouble(eval.stats.mean) << "\n";
    std::cout << "H=" << h << " test median " << formatDouble(eval.stats.p50) << " mean "
              << formatDouble(eval.stats.mean) << "\n";
  }
  writeCsv(a.out, csv.str(), provenance);
  return 0;
}

// --- evaluation ------------------------------------------------------------

std::string workloadName(const std::string& given, const std::string& path) {
  return given.empty() ? fs::path(path).stem().string() : given;
}

std::string perItemCsv(const std::vector<double>& estimates, const std::vector<double>& qerrors,
                       const std::vector<std::size_t>& joins) {
  std::ostringstream out;
  out << "index,joins,estimate,qerror\n";
  for (std::size_t i = 0; i < qerrors.size(); ++i) {
    out << i << "," << joins[i] << "," << (estimates.empty() ? "" : formatDouble(estimates[i])) << ","
        << formatDouble(qerrors[i]) << "\n";
  }
  return out.str();
}

struct EvalCntArgs {
  std::string db;
  std::string pairs;
  std::string model = "crn";
  std::string checkpoint;
  std::string out;
  std::string dump;
  std::string workload;
  double labelFloor = 1e-3;
};

int runEvalCnt(const EvalCntArgs& a) {
  const Database db = loadDatabase(a.db);
  const Json config = {{"db", a.db},
                       {"pairs", a.pairs},
                       {"model", a.model},
                       {"checkpoint", a.checkpoint},
                       {"label_floor", a.labelFloor}};
  const Json provenance = announce("eval-cnt", config, db.schema().hash());
  const auto pairs = loadPairs(a.pairs).items;

  std::optional<Checkpoint> checkpoint;
  std::unique_ptr<ContainmentEstimator> model;
  std::unique_ptr<CardinalityEstimator> base;
  if (a.model == "crn") {
    check(!a.checkpoint.empty(), ErrorKind::kConfig, "--checkpoint is required for the crn model");
    checkpoint = loadCheckpoint(a.checkpoint, db.schema().hash());
    model = std::make_unique<CrnContainment>(checkpoint->params, checkpoint->space);
  } else if (a.model == "exact") {
    model = std::make_unique<ExactContainment>(db);
  } else {
    base = std::make_unique<IndependenceEstimator>(ColumnStatsModel::fromDatabase(db));
    model = std::make_unique<Crd2Cnt>(*base);
  }
  const auto eval = evalContainment(*model, pairs, a.labelFloor);
  std::ostringstream csv;
  csv << statsCsvHeader() << "\n";
  writeStatsCsv(csv, workloadName(a.workload, a.pairs), a.model, eval.stats, &eval.breakdown);
  writeCsv(a.out, csv.str(), provenance);
  if (!a.dump.empty()) {
    std::vector<std::size_t> joins;
    for (const auto& p : pairs) {
      joins.push_back(canonicalize(p.q1).joinCount());
    }
    writeCsv(a.dump, perItemCsv({}, eval.qerrors, joins), provenance);
  }
  std::cout << "containment q-error median " << formatDouble(eval.stats.p50) << " mean "
            << formatDouble(eval.stats.mean) << " over " << eval.stats.count << " pairs\n";
  return 0;
}

struct BuildPoolArgs {
  std::string db;
  std::string queries;
  std::string out;
  double epsilon = kDefaultPoolEpsilon;
  std::string finalFn = "median";
  double trim = kDefaultTrimPerTail;
};

int runBuildPool(const BuildPoolArgs& a) {
  const Database db = loadDatabase(a.db);
  const Json config = {{"db", a.db},
                       {"queries", a.queries},
                       {"epsilon", a.epsilon},
                       {"final_fn", a.finalFn},
                       {"trim_per_tail", a.trim}};
  const Json provenance = announce("build-pool", config, db.schema().hash());
  auto workload = loadQueries(a.queries);
  if (workload.header.contains("schema_hash")) {
    check(workload.header["schema_hash"] == db.schema().hash(), ErrorKind::kConfig,
          "query workload was generated for a different schema");
  }
  const QueriesPool pool(std::move(workload.items), a.epsilon, parseFinalFunction(a.finalFn), a.trim);
  savePool(a.out, pool, db.schema().hash(), provenance);
  std::cout << "pool of " << pool.records().size() << " records over " << pool.index().size()
            << " FROM clauses written to " << a.out << "\n";
  return 0;
}

struct EvalCrdArgs {
  std::string db;
  std::string queries;
  std::string pool;
  std::string model = "crn";
  std::string checkpoint;
  std::string fallback = "independence";
  double fallbackValue = 1.0;
  std::string out;
  std::string dump;
  std::string workload;
};

int runEvalCrd(const EvalCrdArgs& a) {
  const Database db = loadDatabase(a.db);
  const Json config = {{"db", a.db},
                       {"queries", a.queries},
                       {"pool", a.pool},
                       {"model", a.model},
                       {"checkpoint", a.checkpoint},
                       {"fallback", a.fallback},
                       {"fallback_value", a.fallbackValue}};
  const Json provenance = announce("eval-crd", config, db.schema().hash());
  const auto workload = loadQueries(a.queries).items;

  const IndependenceEstimator independence(ColumnStatsModel::fromDatabase(db));
  const ExactCardinality exact(db);
  const ConstantCardinality constant(a.fallbackValue);
  const CardinalityEstimator* fallback = &independence;
  if (a.fallback == "exact") {
    fallback = &exact;
  } else if (a.fallback == "constant") {
    fallback = &constant;
  }

  std::optional<QueriesPool> pool;
  auto needPool = [&]() -> const QueriesPool& {
    if (!pool) {
      check(!a.pool.empty(), ErrorKind::kConfig, "--pool is required for model '" + a.model + "'");
      std::string hash;
      pool = loadPool(a.pool, &hash);
      check(hash == db.schema().hash(), ErrorKind::kConfig, "pool was built for a different schema");
    }
    return *pool;
  };

  std::optional<Checkpoint> checkpoint;
  std::unique_ptr<ContainmentEstimator> rates;
  std::unique_ptr<CardinalityEstimator> estimator;
  if (a.model == "independence") {
    estimator = std::make_unique<IndependenceEstimator>(ColumnStatsModel::fromDatabase(db));
  } else if (a.model == "exact") {
    estimator = std::make_unique<ExactCardinality>(db);
  } else {
    if (a.model == "crn") {
      check(!a.checkpoint.empty(), ErrorKind::kConfig, "--checkpoint is required for the crn model");
      checkpoint = loadCheckpoint(a.checkpoint, db.schema().hash());
      rates = std::make_unique<CrnContainment>(checkpoint->params, checkpoint->space);
    } else if (a.model == "improved-independence") {
      rates = std::make_unique<Crd2Cnt>(independence);
    } else {
      rates = std::make_unique<Crd2Cnt>(exact);
    }
    estimator = std::make_unique<PooledCardinality>(needPool(), *rates, *fallback);
  }
  const auto eval = evalCardinality(*estimator, workload);
  std::ostringstream csv;
  csv << statsCsvHeader() << "\n";
  writeStatsCsv(csv, workloadName(a.workload, a.queries), a.model, eval.stats, &eval.breakdown);
  writeCsv(a.out, csv.str(), provenance);
  if (!a.dump.empty()) {
    std::vector<std::size_t> joins;
    for (const auto& q : workload) {
      joins.push_back(canonicalize(q.q).joinCount());
    }
    writeCsv(a.dump, perItemCsv(eval.estimates, eval.qerrors, joins), provenance);
  }
  std::cout << "cardinality q-error median " << formatDouble(eval.stats.p50) << " mean "
            << formatDouble(eval.stats.mean) << " over " << eval.stats.count << " queries\n";
  return 0;
}

struct RoundTripArgs {
  std::string db;
  std::string out;
  std::size_t n = 200;
  std::size_t maxJoins = 3;
  std::size_t poolSize = 300;
  double tolerance = 1e-9;
  std::uint64_t seed = 0;
};

int runRoundTrip(const RoundTripArgs& a) {
  const Database db = loadDatabase(a.db);
  const Json config = {{"db", a.db},
                       {"n", a.n},
                       {"max_joins", a.maxJoins},
                       {"pool_size", a.poolSize},
                       {"tolerance", a.tolerance},
                       {"seed", a.seed}};
  const Json provenance = announce("round-trip-check", config, db.schema().hash());
  GenConfig cfg;
  cfg.maxJoins = a.maxJoins;
  cfg.seed = a.seed;
  const auto report = roundTripCheck(db, cfg, a.n, a.poolSize, a.tolerance);
  if (!a.out.empty()) {
    std::ostringstream csv;
    csv << statsCsvHeader() << "\n";
    writeStatsCsv(csv, "round-trip", "crd2cnt-exact", report.eval.stats, &report.eval.breakdown);
    writeCsv(a.out, csv.str(), provenance);
  }
  const bool ok = report.exact == report.applicable;
  std::cout << (ok ? "exact" : "inexact") << ": " << report.exact << " of " << report.applicable
            << " applicable queries (of " << report.eval.stats.count << ") have q-error 1, worst "
            << formatDouble(report.worstApplicableQError) << "\n";
  check(ok, ErrorKind::kNumeric, "round trip is not exact");
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Containment-rate networks for cardinality estimation"};
  app.require_subcommand(1);

  GenDbArgs genDb;
  auto* genDbCmd = app.add_subcommand("gen-db", "Generate a synthetic database from a schema");
  genDbCmd->add_option("--schema", genDb.schema, "Schema JSON file")->required();
  genDbCmd->add_option("--out", genDb.out, "Output directory")->required();
  genDbCmd->add_option("--rows", genDb.rows, "Rows per table");
  genDbCmd->add_option("--table-rows", genDb.tableRows, "Per-table override, table=rows");
  genDbCmd->add_option("--seed", genDb.seed, "Root seed");
  genDbCmd->add_option("--correlation", genDb.options.correlation, "Column correlation weight in [0,1]");
  genDbCmd->add_option("--fk-skew", genDb.options.fkSkew, "Foreign-key skew exponent (1 = uniform)");
  genDbCmd->add_option("--inheritance", genDb.options.inheritance, "Parent-to-child correlation weight in [0,1]");

  GenWorkloadArgs genWl;
  auto* genWlCmd = app.add_subcommand("gen-workload", "Generate labeled containment pairs or queries");
  genWlCmd->add_option("--db", genWl.db, "Database directory")->required();
  genWlCmd->add_option("--out", genWl.out, "Output JSON-lines file")->required();
  genWlCmd->add_option("--kind", genWl.kind, "pairs, queries or pool")
      ->check(CLI::IsMember({"pairs", "queries", "pool"}));
  genWlCmd->add_option("--n", genWl.n, "Number of items");
  genWlCmd->add_option("--max-joins", genWl.maxJoins, "Largest join count");
  genWlCmd->add_option("--initial", genWl.initial, "Initial queries per generation round");
  genWlCmd->add_option("--perturbations", genWl.perturbations, "Perturbed variants per initial query");
  genWlCmd->add_option("--cross-pairs", genWl.crossPairs, "Random same-FROM partners per initial query");
  genWlCmd->add_flag("--balance-joins", genWl.balanceJoins, "Draw the join count uniformly");
  genWlCmd->add_flag("--allow-empty", genWl.allowEmpty, "Keep queries with empty results (queries, pool)");
  genWlCmd->add_flag("--non-empty", genWl.nonEmpty, "Keep only pairs whose first query is nonempty (pairs)");
  genWlCmd->add_flag("--no-coverage", genWl.noCoverage, "Pool without predicate-free queries");
  genWlCmd->add_option("--seed", genWl.seed, "Root seed");

  auto addTrainOptions = [](CLI::App* cmd, TrainArgs& t) {
    cmd->add_option("--db", t.db, "Database directory")->required();
    cmd->add_option("--pairs", t.pairs, "Training pairs")->required();
    cmd->add_option("--validation", t.validation, "Validation pairs (default: 20% of --pairs)");
    cmd->add_option("--batch", t.cfg.batchSize, "Minibatch size");
    cmd->add_option("--lr", t.cfg.learningRate, "Learning rate");
    cmd->add_option("--epochs", t.cfg.maxEpochs, "Maximum epochs");
    cmd->add_option("--patience", t.cfg.patience, "Epochs without improvement before stopping");
    cmd->add_option("--label-floor", t.cfg.labelFloor, "Floor applied to containment labels");
    cmd->add_option("--seed", t.seed, "Root seed");
  };

  TrainArgs trainArgs;
  auto* trainCmd = app.add_subcommand("train", "Train a containment-rate network");
  addTrainOptions(trainCmd, trainArgs);
  trainCmd->add_option("--hidden", trainArgs.cfg.hidden, "Hidden width H");
  trainCmd->add_option("--out", trainArgs.out, "Checkpoint file")->required();
  trainCmd->add_option("--report", trainArgs.report, "Per-epoch validation CSV");

  SweepArgs sweep;
  auto* sweepCmd = app.add_subcommand("sweep-h", "Train across hidden widths and report test error");
  addTrainOptions(sweepCmd, sweep.train);
  sweepCmd->add_option("--test", sweep.test, "Held-out pairs")->required();
  sweepCmd->add_option("--hidden-values", sweep.hiddenValues, "Comma-separated hidden widths");
  sweepCmd->add_option("--out", sweep.out, "Result CSV")->required();

  EvalCntArgs evalCnt;
  auto* evalCntCmd = app.add_subcommand("eval-cnt", "Evaluate a containment model on labeled pairs");
  evalCntCmd->add_option("--db", evalCnt.db, "Database directory")->required();
  evalCntCmd->add_option("--pairs", evalCnt.pairs, "Labeled pairs")->required();
  evalCntCmd->add_option("--model", evalCnt.model, "crn, exact or crd2cnt-independence")
      ->check(CLI::IsMember({"crn", "exact", "crd2cnt-independence"}));
  evalCntCmd->add_option("--checkpoint", evalCnt.checkpoint, "Checkpoint for the crn model");
  evalCntCmd->add_option("--label-floor", evalCnt.labelFloor, "Floor applied to labels and estimates");
  evalCntCmd->add_option("--workload", evalCnt.workload, "Workload name in the CSV");
  evalCntCmd->add_option("--dump", evalCnt.dump, "Per-pair q-error CSV");
  evalCntCmd->add_option("--out", evalCnt.out, "Stats CSV")->required();

  BuildPoolArgs buildPool;
  auto* buildPoolCmd = app.add_subcommand("build-pool", "Build a queries pool from labeled queries");
  buildPoolCmd->add_option("--db", buildPool.db, "Database directory")->required();
  buildPoolCmd->add_option("--queries", buildPool.queries, "Labeled queries")->required();
  buildPoolCmd->add_option("--epsilon", buildPool.epsilon, "Skip records whose y-rate is at most this");
  buildPoolCmd->add_option("--final-fn", buildPool.finalFn, "median, mean or trimmed-mean")
      ->check(CLI::IsMember({"median", "mean", "trimmed-mean"}));
  buildPoolCmd->add_option("--trim", buildPool.trim, "Share trimmed from each tail");
  buildPoolCmd->add_option("--out", buildPool.out, "Pool file")->required();

  EvalCrdArgs evalCrd;
  auto* evalCrdCmd = app.add_subcommand("eval-crd", "Evaluate a cardinality estimator on labeled queries");
  evalCrdCmd->add_option("--db", evalCrd.db, "Database directory")->required();
  evalCrdCmd->add_option("--queries", evalCrd.queries, "Labeled queries")->required();
  evalCrdCmd->add_option("--pool", evalCrd.pool, "Queries pool");
  evalCrdCmd->add_option("--model", evalCrd.model, "crn, independence, improved-independence, crd2cnt-exact, exact")
      ->check(CLI::IsMember({"crn", "independence", "improved-independence", "crd2cnt-exact", "exact"}));
  evalCrdCmd->add_option("--checkpoint", evalCrd.checkpoint, "Checkpoint for the crn model");
  evalCrdCmd->add_option("--fallback", evalCrd.fallback, "independence, exact or constant")
      ->check(CLI::IsMember({"independence", "exact", "constant"}));
  evalCrdCmd->add_option("--fallback-value", evalCrd.fallbackValue, "Value of the constant fallback");
  evalCrdCmd->add_option("--workload", evalCrd.workload, "Workload name in the CSV");
  evalCrdCmd->add_option("--dump", evalCrd.dump, "Per-query estimate and q-error CSV");
  evalCrdCmd->add_option("--out", evalCrd.out, "Stats CSV")->required();

  RoundTripArgs roundTrip;
  auto* roundTripCmd = app.add_subcommand("round-trip-check", "Check Cnt2Crd(Crd2Cnt(exact)) reproduces cardinalities");
  roundTripCmd->add_option("--db", roundTrip.db, "Database directory")->required();
  roundTripCmd->add_option("--n", roundTrip.n, "Workload size");
  roundTripCmd->add_option("--max-joins", roundTrip.maxJoins, "Largest join count");
  roundTripCmd->add_option("--pool-size", roundTrip.poolSize, "Pool size");
  roundTripCmd->add_option("--tolerance", roundTrip.tolerance, "Allowed |q-error - 1|");
  roundTripCmd->add_option("--seed", roundTrip.seed, "Root seed");
  roundTripCmd->add_option("--out", roundTrip.out, "Stats CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << errorKindName(ErrorKind::kConfig) << " " << e.what() << std::endl;
    return 2;
  }

  try {
    if (genDbCmd->parsed()) return runGenDb(genDb);
    if (genWlCmd->parsed()) return runGenWorkload(genWl);
    if (trainCmd->parsed()) return runTrain(trainArgs);
    if (sweepCmd->parsed()) return runSweepH(sweep);
    if (evalCntCmd->parsed()) return runEvalCnt(evalCnt);
    if (buildPoolCmd->parsed()) return runBuildPool(buildPool);
    if (evalCrdCmd->parsed()) return runEvalCrd(evalCrd);
    if (roundTripCmd->parsed()) return runRoundTrip(roundTrip);
  } catch (const Error& e) {
    std::cerr << errorKindName(e.kind()) << " " << e.what() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << errorKindName(ErrorKind::kIo) << " " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
