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

#include "cntcard/crn.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "cntcard/error.h"
#include "cntcard/qgen.h"
#include "cntcard/rng.h"
#include "test_support.h"

namespace cntcard {
namespace {

VectorSet randomSet(std::size_t L, std::size_t maxSize, Rng& rng) {
  VectorSet s(rng.index(maxSize + 1));
  for (auto& v : s) {
    v.assign(L, 0.0);
    for (auto& x : v) {
      x = rng.uniform() < 0.4 ? rng.uniform() : 0.0;
    }
  }
  return s;
}

CrnParams randomParams(std::size_t L, std::size_t H, Rng& rng) {
  CrnParams p = CrnParams::zeros(L, H);
  for (auto& x : p.values()) {
    x = rng.uniform() * 2.0 - 1.0;
  }
  return p;
}

std::vector<TrainingExample> examplesFor(const Database& db, std::size_t n, std::uint64_t seed) {
  GenConfig cfg;
  cfg.maxJoins = 1;
  cfg.numInitial = 20;
  cfg.seed = seed;
  const auto pairs = genPairWorkload(cfg, db, n);
  return makeExamples(pairs, FeatureSpace::build(db.schema()));
}

TEST(CrnParamsTest, ParameterCount) {
  EXPECT_EQ(CrnParams::countFor(44, 8), 1265u);
  EXPECT_EQ(initParams(44, 8, 1).size(), 1265u);
  Rng rng(3);
  for (int i = 0; i < 10; ++i) {
    const std::size_t L = 1 + rng.index(50);
    const std::size_t H = 1 + rng.index(40);
    EXPECT_EQ(initParams(L, H, 5).size(), 2 * L * H + 8 * H * H + 6 * H + 1);
  }
}

TEST(CrnParamsTest, InitIsSeededAndBiasesAreZero) {
  const auto a = initParams(20, 8, 42);
  EXPECT_EQ(a, initParams(20, 8, 42));
  EXPECT_NE(a, initParams(20, 8, 43));
  for (double b : a.b1()) EXPECT_EQ(b, 0.0);
  for (double b : a.b2()) EXPECT_EQ(b, 0.0);
  for (double b : a.bOut1()) EXPECT_EQ(b, 0.0);
  EXPECT_EQ(a.bOut2(), 0.0);
  const double bound = 1.0 / std::sqrt(20.0);
  for (double w : a.u1()) EXPECT_LE(std::abs(w), bound);
}

TEST(PoolSetTest, Examples) {
  // L=2, H=2, U = [[1,-1],[2,0]], b = [0, 0.5]
  const std::vector<double> U{1, -1, 2, 0};
  const std::vector<double> b{0, 0.5};
  const VectorSet one{{1, 1}};
  EXPECT_EQ(poolSet(one, U, b), (std::vector<double>{3, 0}));
  const VectorSet twice{{1, 1}, {1, 1}};
  EXPECT_EQ(poolSet(twice, U, b), poolSet(one, U, b));
  const VectorSet none;
  EXPECT_EQ(poolSet(none, U, b), (std::vector<double>{0, 0}));
  const VectorSet bad{{1, 1, 1}};
  try {
    poolSet(bad, U, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kShape);
  }
}

TEST(PoolSetTest, PermutationInvariantBitForBit) {
  Rng rng(11);
  const auto p = randomParams(12, 5, rng);
  for (int trial = 0; trial < 50; ++trial) {
    VectorSet s = randomSet(12, 8, rng);
    VectorSet t = s;
    rng.shuffle(std::span<FeatureVector>(t));
    EXPECT_EQ(poolSet(s, p.u1(), p.b1()), poolSet(t, p.u1(), p.b1()));
  }
}

TEST(ExpandTest, Examples) {
  const std::vector<double> a{1, 2};
  const std::vector<double> b{3, 4};
  EXPECT_EQ(expand(a, b), (std::vector<double>{1, 2, 3, 4, 2, 2, 3, 8}));
  EXPECT_NE(expand(a, b), expand(b, a));
  const auto same = expand(a, a);
  EXPECT_EQ(same[4], 0.0);
  EXPECT_EQ(same[5], 0.0);
  const std::vector<double> c{1};
  EXPECT_THROW(expand(a, c), Error);
}

TEST(ForwardTest, MatchesReferenceAndStaysInRange) {
  Rng rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t L = 3 + rng.index(15);
    const std::size_t H = 1 + rng.index(8);
    const auto p = randomParams(L, H, rng);
    const auto s1 = randomSet(L, 5, rng);
    const auto s2 = randomSet(L, 5, rng);
    const double y = forward(p, s1, s2);
    const std::vector<double> w(p.values().begin(), p.values().end());
    EXPECT_NEAR(y, test::referenceForward(w, L, H, s1, s2), 1e-12);
    EXPECT_GT(y, 0.0);
    EXPECT_LT(y, 1.0);
    EXPECT_EQ(y, forward(p, s1, s2));
  }
}

TEST(ForwardTest, ZeroWeightsCollapseToOutputBias) {
  CrnParams p = CrnParams::zeros(6, 3);
  p.bOut2() = 0.7;
  const VectorSet s{{1, 0, 0, 1, 0.3, 0}};
  EXPECT_DOUBLE_EQ(forward(p, s, s), 1.0 / (1.0 + std::exp(-0.7)));
}

TEST(QErrorTest, Examples) {
  EXPECT_DOUBLE_EQ(qerror(0.5, 0.5, 1e-3), 1.0);
  EXPECT_DOUBLE_EQ(qerror(0.2, 0.4, 1e-3), 2.0);
  EXPECT_DOUBLE_EQ(qerror(0.4, 0.2, 1e-3), 2.0);
  EXPECT_DOUBLE_EQ(qerror(0.0, 1e-3, 1e-3), 1.0);
  EXPECT_DOUBLE_EQ(qerror(0.0, 0.5, 1e-3), 500.0);
}

TEST(GradientTest, MatchesCentralFiniteDifferences) {
  Rng rng(1234);
  for (int config = 0; config < 20; ++config) {
    const std::size_t L = 2 + rng.index(19);
    const std::size_t H = 1 + rng.index(8);
    CrnParams p = randomParams(L, H, rng);
    std::vector<TrainingExample> batch(1 + rng.index(4));
    for (auto& ex : batch) {
      ex.q1 = randomSet(L, 4, rng);
      ex.q2 = randomSet(L, 4, rng);
      ex.rate = rng.uniform() < 0.2 ? 0.0 : rng.uniform();
    }
    EXPECT_NEAR(lossAndGrad(p, batch, 1e-3).loss, meanQError(p, batch, 1e-3), 1e-12);
    const double worst = test::worstGradientError(p, batch, 1e-3);
    EXPECT_LT(worst, 1e-4) << "L=" << L << " H=" << H;
  }
}

TEST(GradientTest, KinkGivesZeroSubgradient) {
  CrnParams p = CrnParams::zeros(4, 2);
  const VectorSet s{{1, 0, 0, 1}};
  const double y = forward(p, s, s);
  const TrainingExample ex{s, s, y};
  const auto lg = lossAndGrad(p, std::span<const TrainingExample>(&ex, 1), 1e-3);
  EXPECT_DOUBLE_EQ(lg.loss, 1.0);
  for (double g : lg.grad.values()) EXPECT_EQ(g, 0.0);
}

TEST(GradientTest, DuplicatingTheBatchChangesNothing) {
  Rng rng(77);
  const auto p = randomParams(10, 4, rng);
  std::vector<TrainingExample> batch(3);
  for (auto& ex : batch) {
    ex.q1 = randomSet(10, 3, rng);
    ex.q2 = randomSet(10, 3, rng);
    ex.rate = rng.uniform();
  }
  std::vector<TrainingExample> doubled = batch;
  doubled.insert(doubled.end(), batch.begin(), batch.end());
  const auto a = lossAndGrad(p, batch, 1e-3);
  const auto b = lossAndGrad(p, doubled, 1e-3);
  EXPECT_NEAR(a.loss, b.loss, 1e-12);
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_NEAR(a.grad.values()[i], b.grad.values()[i], 1e-12);
  }
}

TEST(TrainConfigTest, RejectsBadValues) {
  TrainConfig cfg;
  cfg.hidden = 0;
  EXPECT_THROW(validate(cfg), Error);
  cfg = TrainConfig{};
  cfg.batchSize = 0;
  EXPECT_THROW(validate(cfg), Error);
  cfg = TrainConfig{};
  cfg.learningRate = -1;
  EXPECT_THROW(validate(cfg), Error);
  EXPECT_NO_THROW(validate(TrainConfig{}));
}

class TrainTest : public ::testing::Test {
 protected:
  void SetUp() override {
    db_ = std::make_unique<Database>(buildDatabase(test::twoTableSchema(), {{"A", 60}, {"B", 200}}, 8));
  }
  std::unique_ptr<Database> db_;
};

TEST_F(TrainTest, OverfitsTenPairs) {
  const auto examples = examplesFor(*db_, 10, 2);
  ASSERT_EQ(examples.size(), 10u);
  TrainConfig cfg;
  cfg.hidden = 16;
  cfg.batchSize = 1;
  cfg.maxEpochs = 500;
  cfg.patience = 500;
  cfg.seed = 5;
  const auto result = train(examples.front().q1.front().size(), examples, examples, cfg);
  std::vector<double> errs;
  for (const auto& ex : examples) {
    errs.push_back(qerror(ex.rate, forward(result.params, ex.q1, ex.q2), cfg.labelFloor));
  }
  std::sort(errs.begin(), errs.end());
  EXPECT_LT((errs[4] + errs[5]) / 2, 1.5);
}

TEST_F(TrainTest, ReturnsBestEpochAndIsReproducible) {
  const auto trainSet = examplesFor(*db_, 200, 3);
  const auto valSet = examplesFor(*db_, 60, 4);
  TrainConfig cfg;
  cfg.hidden = 8;
  cfg.batchSize = 16;
  cfg.maxEpochs = 15;
  cfg.patience = 15;
  cfg.seed = 9;
  const std::size_t L = trainSet.front().q1.front().size();
  const auto a = train(L, trainSet, valSet, cfg);
  const auto b = train(L, trainSet, valSet, cfg);
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.report.validationCurve, b.report.validationCurve);
  EXPECT_EQ(a.report.bestEpoch, b.report.bestEpoch);

  const auto& curve = a.report.validationCurve;
  ASSERT_FALSE(curve.empty());
  const double best = *std::min_element(curve.begin(), curve.end());
  EXPECT_EQ(a.report.bestValidationQError, best);
  EXPECT_EQ(curve[a.report.bestEpoch - 1], best);
  EXPECT_EQ(meanQError(a.params, valSet, cfg.labelFloor), best);
}

TEST_F(TrainTest, ZeroPatienceStopsAtFirstNonImprovement) {
  const auto trainSet = examplesFor(*db_, 100, 6);
  const auto valSet = examplesFor(*db_, 40, 7);
  TrainConfig cfg;
  cfg.hidden = 4;
  cfg.batchSize = 8;
  cfg.learningRate = 0.05;
  cfg.maxEpochs = 200;
  cfg.patience = 0;
  cfg.seed = 1;
  const auto r = train(trainSet.front().q1.front().size(), trainSet, valSet, cfg).report;
  const auto& c = r.validationCurve;
  ASSERT_LT(c.size(), cfg.maxEpochs);
  // Every epoch before the last improved on the running best; the last did not.
  double runningBest = c.front();
  for (std::size_t i = 1; i + 1 < c.size(); ++i) {
    EXPECT_LT(c[i], runningBest);
    runningBest = c[i];
  }
  EXPECT_GE(c.back(), runningBest);
}

TEST_F(TrainTest, PredictRequiresSameFrom) {
  const auto space = FeatureSpace::build(db_->schema());
  const auto p = initParams(space, 4, 1);
  const Query a{{"A"}, {}, {}};
  const Query ab{{"A", "B"}, {{{"A", "id"}, {"B", "a_id"}}}, {}};
  const double y = predict(p, space, a, a);
  EXPECT_GT(y, 0.0);
  EXPECT_LT(y, 1.0);
  try {
    predict(p, space, a, ab);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kContainmentDomain);
  }
}

} // namespace
} // namespace cntcard
