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

// Acceptance runner: prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails. Pass criterion ids (A1 ... A9) as
// arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
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
#include "test_support.h"

namespace fs = std::filesystem;
using namespace cntcard;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

double median(std::vector<double> v) {
  return applyFinalFunction(std::move(v), FinalFunction::kMedian);
}

Outcome roundTrip() {
  Stopwatch clock;
  const Database db = buildDatabase(test::movieSchema(),
      {{"title", 1000}, {"cast_info", 1600}, {"movie_info", 1400}, {"movie_companies", 1000}}, 101);
  GenConfig cfg;
  cfg.maxJoins = 3;
  cfg.seed = 11;
  const auto r = roundTripCheck(db, cfg, 200, 300, 1e-9);
  const double secs = clock.seconds();
  return {r.applicable > 0 && r.exact == r.applicable && secs < 60.0,
          std::to_string(r.exact) + "/" + std::to_string(r.applicable) + " applicable queries exact of " +
              std::to_string(r.eval.stats.count) + ", worst q-error " + fmt(r.worstApplicableQError) + ", " +
              fmt(secs) + "s"};
}

Outcome oracleEquivalence() {
  Stopwatch clock;
  const Database db = buildDatabase(test::threeTableSchema(), {{"A", 100}, {"B", 300}, {"C", 600}}, 7);
  GenConfig cfg;
  cfg.maxJoins = 2;
  cfg.seed = 3;
  // 30 queries for every connected FROM clause, then every ordered pair within a clause.
  const auto queries = genPoolQueries(cfg, db, 180, true);
  std::map<std::string, std::vector<std::size_t>> byFrom;
  std::vector<std::vector<std::vector<std::int64_t>>> results;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    byFrom[fromKey(queries[i].q)].push_back(i);
    results.push_back(test::referenceEvaluate(queries[i].q, db));
  }
  std::size_t pairs = 0;
  std::size_t mismatches = 0;
  for (const auto& [key, ids] : byFrom) {
    for (auto i : ids) {
      for (auto j : ids) {
        const auto& r1 = results[i];
        const auto& r2 = results[j];
        std::vector<std::vector<std::int64_t>> both;
        std::set_intersection(r1.begin(), r1.end(), r2.begin(), r2.end(), std::back_inserter(both));
        const double expected =
            r1.empty() ? 0.0 : static_cast<double>(both.size()) / static_cast<double>(r1.size());
        ++pairs;
        if (trueContainmentRate(queries[i].q, queries[j].q, db) != expected) {
          ++mismatches;
        }
      }
    }
  }
  const double secs = clock.seconds();
  return {mismatches == 0 && pairs > 0 && secs < 120.0,
          std::to_string(pairs) + " pairs over " + std::to_string(byFrom.size()) + " FROM clauses, " +
              std::to_string(mismatches) + " mismatches, " + fmt(secs) + "s"};
}

Outcome gradients() {
  Rng rng(2024);
  double worst = 0.0;
  for (int config = 0; config < 20; ++config) {
    const std::size_t L = 2 + rng.index(19);
    const std::size_t H = 1 + rng.index(8);
    CrnParams p = CrnParams::zeros(L, H);
    for (auto& x : p.values()) x = 2.0 * rng.uniform() - 1.0;
    std::vector<TrainingExample> batch(1 + rng.index(4));
    auto randomSet = [&] {
      VectorSet s(rng.index(5));
      for (auto& v : s) {
        v.assign(L, 0.0);
        for (auto& x : v) x = rng.uniform() < 0.4 ? rng.uniform() : 0.0;
      }
      return s;
    };
    for (auto& ex : batch) {
      ex.q1 = randomSet();
      ex.q2 = randomSet();
      ex.rate = rng.uniform() < 0.2 ? 0.0 : rng.uniform();
    }
    worst = std::max(worst, test::worstGradientError(p, batch, 1e-3));
  }
  return {worst < 1e-4, "worst relative error " + fmt(worst) + " over 20 configurations"};
}

/// Shared state for the training-based criteria.
struct TrainedSetup {
  std::unique_ptr<Database> db;
  FeatureSpace space;
  CrnParams params;
  TrainReport report;
  double heldOutMedian = 0.0;
  double seconds = 0.0;
};

const TrainedSetup& trainedSetup() {
  static const TrainedSetup setup = [] {
    Stopwatch clock;
    TrainedSetup s;
    s.db = std::make_unique<Database>(buildDatabase(test::movieSchema(),
        {{"title", 2000}, {"cast_info", 3000}, {"movie_info", 2800}, {"movie_companies", 2200}}, 41));
    s.space = FeatureSpace::build(s.db->schema());
    GenConfig cfg;
    cfg.maxJoins = 2;
    cfg.numInitial = 900;
    cfg.seed = 42;
    auto pairs = genPairWorkload(cfg, *s.db, 6000);
    Rng rng(deriveSeed(42, "split"));
    rng.shuffle(std::span<LabeledPair>(pairs));
    const std::vector<LabeledPair> heldOut(pairs.begin() + 5000, pairs.end());
    pairs.resize(5000);
    Rng splitRng(deriveSeed(42, "validation"));
    const auto split = splitTrainValidation(pairs, splitRng);

    TrainConfig tc;
    tc.hidden = 64;
    tc.batchSize = 128;
    tc.learningRate = 1e-3;
    tc.maxEpochs = 200;
    tc.patience = 20;
    tc.seed = deriveSeed(42, "train");
    const auto trainSet = makeExamples(split.train, s.space);
    const auto valSet = makeExamples(split.validation, s.space);
    auto result = train(s.space.width(), trainSet, valSet, tc);
    s.params = std::move(result.params);
    s.report = result.report;
    const auto eval = evalContainment(CrnContainment(s.params, s.space), heldOut, tc.labelFloor);
    s.heldOutMedian = eval.stats.p50;
    s.seconds = clock.seconds();
    return s;
  }();
  return setup;
}

Outcome convergence() {
  const auto& s = trainedSetup();
  const double ratio = s.report.initialValidationQError / s.report.bestValidationQError;
  return {ratio >= 5.0 && s.heldOutMedian <= 4.5 && s.seconds < 600.0,
          "untrained " + fmt(s.report.initialValidationQError) + " -> best " + fmt(s.report.bestValidationQError) +
              " at epoch " + std::to_string(s.report.bestEpoch) + " (" + fmt(ratio) + "x), held-out median " +
              fmt(s.heldOutMedian) + ", " + fmt(s.seconds) + "s"};
}

struct CardinalitySetup {
  std::vector<LabeledQuery> workload;
  QueriesPool pool{{}, kDefaultPoolEpsilon, FinalFunction::kMedian};
};

const CardinalitySetup& cardinalitySetup() {
  static const CardinalitySetup setup = [] {
    const auto& s = trainedSetup();
    GenConfig cfg;
    cfg.maxJoins = 3;
    cfg.balanceJoins = true;
    cfg.nonEmptyOnly = true;
    cfg.seed = 77;
    CardinalitySetup c;
    c.workload = genQueryWorkload(cfg, *s.db, 400);
    cfg.seed = 78;
    c.pool = buildPool(genPoolQueries(cfg, *s.db, 300, true));
    return c;
  }();
  return setup;
}

std::map<std::size_t, double> mediansByJoins(const CardinalityEvaluation& e) {
  std::map<std::size_t, double> out;
  for (const auto& [joins, stats] : e.breakdown.byJoins) {
    out[joins] = stats.p50;
  }
  return out;
}

std::string describe(const std::map<std::size_t, double>& m) {
  std::string out;
  for (const auto& [j, v] : m) {
    out += (out.empty() ? "" : " ") + std::to_string(j) + "j:" + fmt(v);
  }
  return out;
}

/// The model behind Cnt2Crd. Cnt2Crd only asks for rates whose first query
/// is nonempty (a workload query or a pool record), so its training pairs are
/// drawn the same way, with more random same-FROM partners than the default.
const CrnParams& cnt2crdModel() {
  static const CrnParams params = [] {
    const auto& s = trainedSetup();
    GenConfig cfg;
    cfg.maxJoins = 2;
    cfg.numInitial = 3000;
    cfg.crossPairsPerQuery = 6;
    cfg.nonEmptyOnly = true;
    cfg.seed = 45;
    auto pairs = genPairWorkload(cfg, *s.db, 20000);
    Rng splitRng(deriveSeed(45, "validation"));
    const auto split = splitTrainValidation(std::move(pairs), splitRng);
    TrainConfig tc;
    tc.hidden = 64;
    tc.maxEpochs = 200;
    tc.patience = 20;
    tc.seed = deriveSeed(45, "train");
    return train(s.space.width(), makeExamples(split.train, s.space), makeExamples(split.validation, s.space), tc)
        .params;
  }();
  return params;
}

Outcome multiJoin() {
  Stopwatch clock;
  const auto& s = trainedSetup();
  const auto& c = cardinalitySetup();
  const auto& params = cnt2crdModel();
  const IndependenceEstimator baseline(ColumnStatsModel::fromDatabase(*s.db));
  const CrnContainment crn(params, s.space);
  const PooledCardinality cnt2crd(c.pool, crn, baseline);
  const auto ours = mediansByJoins(evalCardinality(cnt2crd, c.workload));
  const auto base = mediansByJoins(evalCardinality(baseline, c.workload));
  if (!ours.contains(3) || !ours.contains(2)) {
    return {false, "workload lacks 2- or 3-join queries"};
  }
  const double ourFactor = ours.at(3) / ours.at(2);
  const double baseFactor = base.at(3) / base.at(2);
  return {ours.at(3) < base.at(3) && ourFactor < baseFactor,
          "medians Cnt2Crd(CRN) [" + describe(ours) + "] vs independence [" + describe(base) +
              "], 2->3 join factor " + fmt(ourFactor) + " vs " + fmt(baseFactor) + ", " + fmt(clock.seconds()) + "s"};
}

Outcome parameterCount() {
  Rng rng(6);
  const fs::path dir = fs::temp_directory_path() / "cntcard_acceptance_a6";
  fs::create_directories(dir);
  std::string detail;
  bool pass = true;
  for (int i = 0; i < 10; ++i) {
    const std::size_t nT = 1 + rng.index(6);
    const std::size_t nC = nT + rng.index(12);
    std::vector<std::string> tables;
    std::vector<ColumnRef> columns;
    std::vector<FeatureSpace::ColumnRange> ranges;
    for (std::size_t t = 0; t < nT; ++t) tables.push_back("t" + std::to_string(t));
    for (std::size_t c = 0; c < nC; ++c) {
      columns.push_back({tables[c % nT], "c" + std::to_string(c)});
      ranges.push_back({0, 10});
    }
    std::sort(columns.begin(), columns.end());
    const auto space = FeatureSpace::fromParts(tables, columns, ranges, "h");
    const std::size_t L = space.width();
    const std::size_t H = 1 + rng.index(64);
    saveCheckpoint(dir / "model.json", {space, initParams(space, H, 9), Json::object()});
    const std::size_t stored = countCheckpointScalars(readJsonFile(dir / "model.json"));
    const std::size_t expected = 2 * L * H + 8 * H * H + 6 * H + 1;
    pass = pass && stored == expected;
    detail += (detail.empty() ? "" : " ") + std::string("(L=") + std::to_string(L) + ",H=" + std::to_string(H) +
              ")=" + std::to_string(stored);
  }
  fs::remove_all(dir);
  return {pass, detail};
}

Outcome improvedModel() {
  const auto& s = trainedSetup();
  const auto& c = cardinalitySetup();
  const IndependenceEstimator baseline(ColumnStatsModel::fromDatabase(*s.db));
  const Crd2Cnt rates(baseline);
  const PooledCardinality improved(c.pool, rates, baseline);
  const auto a = evalCardinality(improved, c.workload);
  const auto b = evalCardinality(baseline, c.workload);
  return {a.stats.p50 <= b.stats.p50,
          "median improved " + fmt(a.stats.p50) + " vs baseline " + fmt(b.stats.p50) + " (means " +
              fmt(a.stats.mean) + " vs " + fmt(b.stats.mean) + ")"};
}

Outcome statistics() {
  bool pass = true;
  std::string failures;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      failures += " " + what;
    }
  };
  // Hand-computed on fixed ten-element lists.
  const std::vector<double> a{7, 1, 3, 10, 2, 9, 4, 8, 6, 5};
  expect(percentile(a, 50) == 5, "p50(a)");
  expect(percentile(a, 75) == 8, "p75(a)");
  expect(percentile(a, 90) == 9, "p90(a)");
  expect(percentile(a, 95) == 10, "p95(a)");
  expect(percentile(a, 99) == 10, "p99(a)");
  expect(percentile(a, 100) == 10, "p100(a)");
  expect(applyFinalFunction(a, FinalFunction::kMedian) == 5.5, "median(a)");
  expect(applyFinalFunction(a, FinalFunction::kMean) == 5.5, "mean(a)");
  // ceil(1.25) = 2 dropped per tail: mean of 3..8.
  expect(applyFinalFunction(a, FinalFunction::kTrimmedMean) == 5.5, "trimmed(a)");
  const std::vector<double> b{1, 1, 1, 2, 2, 3, 5, 8, 40, 1000};
  expect(percentile(b, 50) == 2, "p50(b)");
  expect(percentile(b, 75) == 8, "p75(b)");
  expect(percentile(b, 90) == 40, "p90(b)");
  expect(applyFinalFunction(b, FinalFunction::kMedian) == 2.5, "median(b)");
  expect(applyFinalFunction(b, FinalFunction::kTrimmedMean) == 3.5, "trimmed(b)");
  expect(computeStats(b).mean == 106.3, "mean(b)");

  Rng rng(88);
  std::size_t fuzzed = 0;
  for (int t = 0; t < 2000; ++t) {
    std::vector<double> v(1 + rng.index(200));
    for (auto& x : v) x = 1.0 + std::exp(10.0 * rng.uniform()) - 1.0;
    const auto st = computeStats(v);
    const bool ordered = st.p50 <= st.p75 && st.p75 <= st.p90 && st.p90 <= st.p95 && st.p95 <= st.p99 &&
                         st.p99 <= st.max && st.mean >= 1.0 && st.p50 >= 1.0;
    expect(ordered, "ordering#" + std::to_string(t));
    ++fuzzed;
  }
  return {pass, pass ? "fixed lists match, ordering held on " + std::to_string(fuzzed) + " fuzzed inputs"
                     : "mismatches:" + failures};
}

std::string readFile(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "cntcard_acceptance_a9";
  fs::remove_all(root);
  const std::string cli = CNTCARD_CLI_PATH;
  const std::string schema = std::string(CNTCARD_DATA_DIR) + "/movies_schema.json";
  auto runPipeline = [&](const fs::path& dir) {
    fs::create_directories(dir);
    const std::string d = dir.string();
    const std::vector<std::string> steps{
        "gen-db --schema " + schema + " --rows 300 --seed 5 --out " + d + "/db",
        "gen-workload --db " + d + "/db --kind pairs --max-joins 2 --n 400 --seed 5 --out " + d + "/pairs.jsonl",
        "gen-workload --db " + d + "/db --kind pairs --max-joins 2 --n 100 --seed 6 --out " + d + "/test.jsonl",
        "gen-workload --db " + d + "/db --kind queries --max-joins 3 --n 100 --seed 7 --out " + d + "/queries.jsonl",
        "gen-workload --db " + d + "/db --kind pool --max-joins 3 --n 120 --seed 8 --out " + d + "/poolq.jsonl",
        "train --db " + d + "/db --pairs " + d + "/pairs.jsonl --hidden 16 --epochs 5 --seed 5 --out " + d +
            "/model.json --report " + d + "/train.csv",
        "eval-cnt --db " + d + "/db --pairs " + d + "/test.jsonl --model crn --checkpoint " + d +
            "/model.json --out " + d + "/cnt.csv",
        "build-pool --db " + d + "/db --queries " + d + "/poolq.jsonl --out " + d + "/pool.jsonl",
        "eval-crd --db " + d + "/db --queries " + d + "/queries.jsonl --pool " + d + "/pool.jsonl --model crn --checkpoint " +
            d + "/model.json --out " + d + "/crd.csv",
        "sweep-h --db " + d + "/db --pairs " + d + "/pairs.jsonl --test " + d + "/test.jsonl --hidden-values 4,8 --epochs 3 --seed 5 --out " +
            d + "/sweep.csv",
        "round-trip-check --db " + d + "/db --n 60 --seed 9 --out " + d + "/roundtrip.csv",
    };
    for (const auto& step : steps) {
      const std::string cmd = "\"" + cli + "\" " + step + " 2>>\"" + d + "/stderr.log\"";
      if (std::system(cmd.c_str()) != 0) {
        return "step failed: " + step.substr(0, step.find(' '));
      }
    }
    return std::string();
  };
  // Output files record the paths they were built from, so both runs use the
  // same working directory and are moved aside afterwards.
  for (const char* run : {"run1", "run2"}) {
    const auto err = runPipeline(root / "work");
    if (!err.empty()) {
      return {false, err};
    }
    fs::rename(root / "work", root / run);
  }
  std::size_t files = 0;
  std::size_t differing = 0;
  std::string names;
  for (const auto& entry : fs::recursive_directory_iterator(root / "run1")) {
    if (!entry.is_regular_file() || entry.path().filename() == "stderr.log") {
      continue;
    }
    const auto rel = fs::relative(entry.path(), root / "run1");
    ++files;
    if (readFile(entry.path()) != readFile(root / "run2" / rel)) {
      ++differing;
      names += " " + rel.string();
    }
  }
  fs::remove_all(root);
  return {differing == 0 && files > 0,
          std::to_string(files) + " output files compared, " + std::to_string(differing) + " differ" + names};
}

} // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"A1", roundTrip},       {"A2", oracleEquivalence}, {"A3", gradients},
      {"A4", convergence},     {"A5", multiJoin},         {"A6", parameterCount},
      {"A7", improvedModel},   {"A8", statistics},        {"A9", determinism},
  };
  std::set<std::string> selected(argv + 1, argv + argc);
  int failed = 0;
  for (const auto& [id, run] : criteria) {
    if (!selected.empty() && !selected.contains(id)) {
      continue;
    }
    Outcome out;
    try {
      out = run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    std::cout << id << " " << (out.pass ? "PASS" : "FAIL") << " " << out.detail << std::endl;
    failed += out.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
