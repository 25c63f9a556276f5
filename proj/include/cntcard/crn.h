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
#include <span>
#include <vector>

#include "cntcard/featurizer.h"
#include "cntcard/qgen.h"
#include "cntcard/query.h"

namespace cntcard {

/// All learned weights of the containment-rate network, stored contiguously
/// in the order U1, b1, U2, b2, Uout1, bout1, Uout2, bout2. Matrices are
/// row-major with the input dimension as rows:
///
///   U1, U2 : L x H       Uout1 : 4H x 2H       Uout2 : 2H x 1
class CrnParams {
 public:
  CrnParams() = default;

  /// Zero-filled parameters for input width L and hidden width H.
  static CrnParams zeros(std::size_t inputWidth, std::size_t hidden);

  /// 2LH + 8H^2 + 6H + 1.
  static std::size_t countFor(std::size_t inputWidth, std::size_t hidden) {
    return 2 * inputWidth * hidden + 8 * hidden * hidden + 6 * hidden + 1;
  }

  std::size_t inputWidth() const {
    return inputWidth_;
  }
  std::size_t hidden() const {
    return hidden_;
  }
  std::size_t size() const {
    return values_.size();
  }

  std::span<double> values() {
    return values_;
  }
  std::span<const double> values() const {
    return values_;
  }

  std::span<double> u1() {
    return block(0);
  }
  std::span<double> b1() {
    return block(1);
  }
  std::span<double> u2() {
    return block(2);
  }
  std::span<double> b2() {
    return block(3);
  }
  std::span<double> uOut1() {
    return block(4);
  }
  std::span<double> bOut1() {
    return block(5);
  }
  std::span<double> uOut2() {
    return block(6);
  }
  double& bOut2() {
    return block(7)[0];
  }

  std::span<const double> u1() const {
    return block(0);
  }
  std::span<const double> b1() const {
    return block(1);
  }
  std::span<const double> u2() const {
    return block(2);
  }
  std::span<const double> b2() const {
    return block(3);
  }
  std::span<const double> uOut1() const {
    return block(4);
  }
  std::span<const double> bOut1() const {
    return block(5);
  }
  std::span<const double> uOut2() const {
    return block(6);
  }
  double bOut2() const {
    return block(7)[0];
  }
  /// bout2 as a one-element span, for uniform block iteration.
  std::span<const double> bOut2Span() const {
    return block(7);
  }

  bool allFinite() const;

  bool operator==(const CrnParams&) const = default;

 private:
  std::size_t blockOffset(int which) const;
  std::size_t blockSize(int which) const;
  std::span<double> block(int which) {
    return std::span<double>(values_).subspan(blockOffset(which), blockSize(which));
  }
  std::span<const double> block(int which) const {
    return std::span<const double>(values_).subspan(blockOffset(which), blockSize(which));
  }

  std::size_t inputWidth_ = 0;
  std::size_t hidden_ = 0;
  std::vector<double> values_;
};

/// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
CrnParams initParams(std::size_t inputWidth, std::size_t hidden, std::uint64_t seed);
CrnParams initParams(const FeatureSpace& space, std::size_t hidden, std::uint64_t seed);

/// Mean of ReLU(v U + b) over the set; the zero vector for an empty set.
/// Elements are summed in lexicographic order, so the result is bit-identical
/// for every ordering of the input.
std::vector<double> poolSet(
    std::span<const FeatureVector> vectors,
    std::span<const double> weights,
    std::span<const double> bias);

/// [v1, v2, |v1 - v2|, v1 * v2] with elementwise products.
std::vector<double> expand(std::span<const double> v1, std::span<const double> v2);

/// Estimated containment rate of the first set's query in the second's.
double forward(const CrnParams& params, std::span<const FeatureVector> v1, std::span<const FeatureVector> v2);

/// Ratio error between a true rate y (floored at labelFloor) and an estimate.
double qerror(double y, double estimate, double labelFloor);

struct TrainingExample {
  VectorSet q1;
  VectorSet q2;
  double rate = 0.0;
};

/// Featurizes labeled pairs in order.
std::vector<TrainingExample> makeExamples(std::span<const LabeledPair> pairs, const FeatureSpace& space);

struct LossAndGrad {
  double loss = 0.0;
  CrnParams grad;
};

/// Mean q-error over the batch and its exact gradient. At the kink where the
/// estimate equals the floored label the subgradient 0 is used.
LossAndGrad lossAndGrad(const CrnParams& params, std::span<const TrainingExample> batch, double labelFloor);

double meanQError(const CrnParams& params, std::span<const TrainingExample> examples, double labelFloor);

struct TrainConfig {
  std::size_t hidden = 64;
  std::size_t batchSize = 128;
  double learningRate = 1e-3;
  std::size_t maxEpochs = 100;
  std::size_t patience = 10;
  double labelFloor = 1e-3;
  std::uint64_t seed = 0;
};

/// Throws a config error when a field is out of range.
void validate(const TrainConfig& cfg);

struct TrainReport {
  /// Validation mean q-error of the freshly initialized model.
  double initialValidationQError = 0.0;
  /// Validation mean q-error after each epoch.
  std::vector<double> validationCurve;
  /// 1-based epoch whose parameters were returned.
  std::size_t bestEpoch = 0;
  double bestValidationQError = 0.0;
  double wallSeconds = 0.0;
};

struct TrainResult {
  CrnParams params;
  TrainReport report;
};

/// Adam (beta1 0.9, beta2 0.999, eps 1e-8) over shuffled minibatches with
/// early stopping on validation mean q-error. Returns the best epoch's
/// parameters. Deterministic for a fixed seed.
TrainResult train(
    std::size_t inputWidth,
    std::span<const TrainingExample> trainSet,
    std::span<const TrainingExample> validationSet,
    const TrainConfig& cfg);

/// forward(featurize(q1), featurize(q2)); the FROM clauses must match.
double predict(const CrnParams& params, const FeatureSpace& space, const Query& q1, const Query& q2);

} // namespace cntcard
