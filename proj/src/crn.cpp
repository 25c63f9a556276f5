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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "cntcard/error.h"
#include "cntcard/rng.h"

namespace cntcard {

// ---------------------------------------------------------------------------
// Parameters

CrnParams CrnParams::zeros(std::size_t inputWidth, std::size_t hidden) {
  check(inputWidth > 0 && hidden > 0, ErrorKind::kShape, "network dimensions must be positive");
  CrnParams p;
  p.inputWidth_ = inputWidth;
  p.hidden_ = hidden;
  p.values_.assign(countFor(inputWidth, hidden), 0.0);
  return p;
}

std::size_t CrnParams::blockSize(int which) const {
  const std::size_t l = inputWidth_;
  const std::size_t h = hidden_;
  switch (which) {
    case 0:
    case 2:
      return l * h;
    case 1:
    case 3:
      return h;
    case 4:
      return 8 * h * h;
    case 5:
    case 6:
      return 2 * h;
    default:
      return 1;
  }
}

std::size_t CrnParams::blockOffset(int which) const {
  std::size_t offset = 0;
  for (int i = 0; i < which; ++i) {
    offset += blockSize(i);
  }
  return offset;
}

bool CrnParams::allFinite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

CrnParams initParams(std::size_t inputWidth, std::size_t hidden, std::uint64_t seed) {
  CrnParams p = CrnParams::zeros(inputWidth, hidden);
  Rng rng(seed);
  auto fill = [&](std::span<double> block, std::size_t fanIn) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fanIn));
    for (auto& w : block) {
      w = (2.0 * rng.uniform() - 1.0) * bound;
    }
  };
  fill(p.u1(), inputWidth);
  fill(p.u2(), inputWidth);
  fill(p.uOut1(), 4 * hidden);
  fill(p.uOut2(), 2 * hidden);
  return p;
}

CrnParams initParams(const FeatureSpace& space, std::size_t hidden, std::uint64_t seed) {
  return initParams(space.width(), hidden, seed);
}

// ---------------------------------------------------------------------------
// Forward pass

namespace {

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Per-set intermediate values kept for the backward pass.
struct SetTrace {
  std::vector<std::size_t> order;
  std::vector<double> preActivation; // |set| x H, in `order`
  std::vector<double> pooled;        // H
};

SetTrace poolTraced(
    std::span<const FeatureVector> vectors,
    std::span<const double> weights,
    std::span<const double> bias) {
  const std::size_t h = bias.size();
  check(h > 0 && weights.size() % h == 0, ErrorKind::kShape, "weight matrix does not match bias width");
  const std::size_t l = weights.size() / h;
  SetTrace trace;
  trace.pooled.assign(h, 0.0);
  trace.order.resize(vectors.size());
  std::iota(trace.order.begin(), trace.order.end(), std::size_t{0});
  for (const auto& v : vectors) {
    check(v.size() == l, ErrorKind::kShape,
          "feature vector width " + std::to_string(v.size()) + " != " + std::to_string(l));
  }
  std::sort(trace.order.begin(), trace.order.end(),
            [&](std::size_t a, std::size_t b) { return vectors[a] < vectors[b]; });
  trace.preActivation.assign(vectors.size() * h, 0.0);
  for (std::size_t n = 0; n < trace.order.size(); ++n) {
    const auto& v = vectors[trace.order[n]];
    double* z = trace.preActivation.data() + n * h;
    std::copy(bias.begin(), bias.end(), z);
    for (std::size_t k = 0; k < l; ++k) {
      if (v[k] == 0.0) {
        continue;
      }
      const double* row = weights.data() + k * h;
      for (std::size_t j = 0; j < h; ++j) {
        z[j] += v[k] * row[j];
      }
    }
    for (std::size_t j = 0; j < h; ++j) {
      trace.pooled[j] += std::max(z[j], 0.0);
    }
  }
  if (!vectors.empty()) {
    const double inv = 1.0 / static_cast<double>(vectors.size());
    for (auto& x : trace.pooled) {
      x *= inv;
    }
  }
  return trace;
}

struct ForwardTrace {
  SetTrace set1;
  SetTrace set2;
  std::vector<double> expanded;  // 4H
  std::vector<double> hiddenPre; // 2H
  double output = 0.0;
};

ForwardTrace forwardTraced(const CrnParams& p, std::span<const FeatureVector> v1, std::span<const FeatureVector> v2) {
  const std::size_t h = p.hidden();
  ForwardTrace t;
  t.set1 = poolTraced(v1, p.u1(), p.b1());
  t.set2 = poolTraced(v2, p.u2(), p.b2());
  t.expanded = expand(t.set1.pooled, t.set2.pooled);
  auto u = p.uOut1();
  t.hiddenPre.assign(p.bOut1().begin(), p.bOut1().end());
  for (std::size_t i = 0; i < 4 * h; ++i) {
    const double e = t.expanded[i];
    if (e == 0.0) {
      continue;
    }
    const double* row = u.data() + i * 2 * h;
    for (std::size_t j = 0; j < 2 * h; ++j) {
      t.hiddenPre[j] += e * row[j];
    }
  }
  double logit = p.bOut2();
  auto u2 = p.uOut2();
  for (std::size_t j = 0; j < 2 * h; ++j) {
    logit += std::max(t.hiddenPre[j], 0.0) * u2[j];
  }
  t.output = sigmoid(logit);
  return t;
}

double qerrorSlope(double y, double estimate, double labelFloor) {
  const double floored = std::max(y, labelFloor);
  if (estimate > floored) {
    return 1.0 / floored;
  }
  if (estimate < floored) {
    return -floored / (estimate * estimate);
  }
  return 0.0;
}

void backpropSet(
    const SetTrace& trace,
    std::span<const FeatureVector> vectors,
    std::span<const double> dPooled,
    std::span<double> dWeights,
    std::span<double> dBias) {
  if (vectors.empty()) {
    return;
  }
  const std::size_t h = dBias.size();
  const double inv = 1.0 / static_cast<double>(vectors.size());
  std::vector<double> dz(h);
  for (std::size_t n = 0; n < trace.order.size(); ++n) {
    const auto& v = vectors[trace.order[n]];
    const double* z = trace.preActivation.data() + n * h;
    for (std::size_t j = 0; j < h; ++j) {
      dz[j] = z[j] > 0.0 ? dPooled[j] * inv : 0.0;
      dBias[j] += dz[j];
    }
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (v[k] == 0.0) {
        continue;
      }
      double* row = dWeights.data() + k * h;
      for (std::size_t j = 0; j < h; ++j) {
        row[j] += v[k] * dz[j];
      }
    }
  }
}

} // namespace

std::vector<double> poolSet(
    std::span<const FeatureVector> vectors,
    std::span<const double> weights,
    std::span<const double> bias) {
  return poolTraced(vectors, weights, bias).pooled;
}

std::vector<double> expand(std::span<const double> v1, std::span<const double> v2) {
  check(v1.size() == v2.size(), ErrorKind::kShape, "expand needs equal widths");
  const std::size_t h = v1.size();
  std::vector<double> out(4 * h);
  for (std::size_t j = 0; j < h; ++j) {
    out[j] = v1[j];
    out[h + j] = v2[j];
    out[2 * h + j] = std::abs(v1[j] - v2[j]);
    out[3 * h + j] = v1[j] * v2[j];
  }
  return out;
}

double forward(const CrnParams& params, std::span<const FeatureVector> v1, std::span<const FeatureVector> v2) {
  return forwardTraced(params, v1, v2).output;
}

double qerror(double y, double estimate, double labelFloor) {
  const double floored = std::max(y, labelFloor);
  return estimate > floored ? estimate / floored : floored / estimate;
}

// ---------------------------------------------------------------------------
// Loss and gradient

std::vector<TrainingExample> makeExamples(std::span<const LabeledPair> pairs, const FeatureSpace& space) {
  std::vector<TrainingExample> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    out.push_back({featurize(p.q1, space), featurize(p.q2, space), p.rate});
  }
  return out;
}

LossAndGrad lossAndGrad(const CrnParams& params, std::span<const TrainingExample> batch, double labelFloor) {
  check(!batch.empty(), ErrorKind::kTraining, "empty batch");
  const std::size_t h = params.hidden();
  LossAndGrad out;
  out.grad = CrnParams::zeros(params.inputWidth(), h);
  auto& g = out.grad;
  const double scale = 1.0 / static_cast<double>(batch.size());

  std::vector<double> dHidden(2 * h);
  std::vector<double> dExpanded(4 * h);
  std::vector<double> dPooled1(h);
  std::vector<double> dPooled2(h);
  for (const auto& ex : batch) {
    const ForwardTrace t = forwardTraced(params, ex.q1, ex.q2);
    const double yhat = t.output;
    out.loss += qerror(ex.rate, yhat, labelFloor);

    const double dLogit = scale * qerrorSlope(ex.rate, yhat, labelFloor) * yhat * (1.0 - yhat);
    if (dLogit == 0.0) {
      continue;
    }
    g.bOut2() += dLogit;
    auto u2 = params.uOut2();
    auto dU2 = g.uOut2();
    for (std::size_t j = 0; j < 2 * h; ++j) {
      const double pre = t.hiddenPre[j];
      dU2[j] += std::max(pre, 0.0) * dLogit;
      dHidden[j] = pre > 0.0 ? u2[j] * dLogit : 0.0;
    }
    auto dB1 = g.bOut1();
    for (std::size_t j = 0; j < 2 * h; ++j) {
      dB1[j] += dHidden[j];
    }
    auto u1 = params.uOut1();
    auto dU1 = g.uOut1();
    for (std::size_t i = 0; i < 4 * h; ++i) {
      const double e = t.expanded[i];
      const double* row = u1.data() + i * 2 * h;
      double* dRow = dU1.data() + i * 2 * h;
      double acc = 0.0;
      for (std::size_t j = 0; j < 2 * h; ++j) {
        dRow[j] += e * dHidden[j];
        acc += row[j] * dHidden[j];
      }
      dExpanded[i] = acc;
    }
    const auto& p1 = t.set1.pooled;
    const auto& p2 = t.set2.pooled;
    for (std::size_t j = 0; j < h; ++j) {
      const double diff = p1[j] - p2[j];
      const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
      dPooled1[j] = dExpanded[j] + sign * dExpanded[2 * h + j] + p2[j] * dExpanded[3 * h + j];
      dPooled2[j] = dExpanded[h + j] - sign * dExpanded[2 * h + j] + p1[j] * dExpanded[3 * h + j];
    }
    backpropSet(t.set1, ex.q1, dPooled1, g.u1(), g.b1());
    backpropSet(t.set2, ex.q2, dPooled2, g.u2(), g.b2());
  }
  out.loss *= scale;
  check(std::isfinite(out.loss), ErrorKind::kNumeric, "non-finite loss");
  return out;
}

double meanQError(const CrnParams& params, std::span<const TrainingExample> examples, double labelFloor) {
  check(!examples.empty(), ErrorKind::kTraining, "no examples to evaluate");
  double total = 0.0;
  for (const auto& ex : examples) {
    total += qerror(ex.rate, forward(params, ex.q1, ex.q2), labelFloor);
  }
  return total / static_cast<double>(examples.size());
}

// ---------------------------------------------------------------------------
// Training

void validate(const TrainConfig& cfg) {
  check(cfg.hidden > 0, ErrorKind::kConfig, "hidden width must be positive");
  check(cfg.batchSize > 0, ErrorKind::kConfig, "batch size must be positive");
  check(cfg.learningRate > 0.0, ErrorKind::kConfig, "learning rate must be positive");
  check(cfg.maxEpochs > 0, ErrorKind::kConfig, "max epochs must be positive");
  check(cfg.labelFloor > 0.0 && cfg.labelFloor <= 0.01, ErrorKind::kConfig, "label floor must lie in (0, 0.01]");
}

TrainResult train(
    std::size_t inputWidth,
    std::span<const TrainingExample> trainSet,
    std::span<const TrainingExample> validationSet,
    const TrainConfig& cfg) {
  validate(cfg);
  check(!trainSet.empty() && !validationSet.empty(), ErrorKind::kTraining, "training and validation sets must be nonempty");
  const auto started = std::chrono::steady_clock::now();

  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEpsilon = 1e-8;

  TrainResult result;
  CrnParams params = initParams(inputWidth, cfg.hidden, deriveSeed(cfg.seed, "init"));
  result.report.initialValidationQError = meanQError(params, validationSet, cfg.labelFloor);
  result.params = params;
  result.report.bestValidationQError = result.report.initialValidationQError;

  std::vector<double> m(params.size(), 0.0);
  std::vector<double> v(params.size(), 0.0);
  std::uint64_t step = 0;
  Rng shuffler(deriveSeed(cfg.seed, "shuffle"));
  std::vector<TrainingExample> shuffled(trainSet.begin(), trainSet.end());
  bool improvedOnce = false;
  std::size_t sinceImprovement = 0;

  for (std::size_t epoch = 1; epoch <= cfg.maxEpochs; ++epoch) {
    shuffler.shuffle(std::span<TrainingExample>(shuffled));
    for (std::size_t start = 0; start < shuffled.size(); start += cfg.batchSize) {
      const std::size_t count = std::min(shuffled.size() - start, cfg.batchSize);
      LossAndGrad lg;
      try {
        lg = lossAndGrad(params, std::span<const TrainingExample>(shuffled).subspan(start, count), cfg.labelFloor);
      } catch (const Error& e) {
        fail(ErrorKind::kTraining, "epoch " + std::to_string(epoch) + ": " + e.what());
      }
      ++step;
      const double correction1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double correction2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      auto theta = params.values();
      auto grad = lg.grad.values();
      for (std::size_t i = 0; i < theta.size(); ++i) {
        m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * grad[i];
        v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * grad[i] * grad[i];
        theta[i] -= cfg.learningRate * (m[i] / correction1) / (std::sqrt(v[i] / correction2) + kEpsilon);
      }
    }
    check(params.allFinite(), ErrorKind::kTraining, "epoch " + std::to_string(epoch) + ": parameters diverged");

    const double val = meanQError(params, validationSet, cfg.labelFloor);
    check(std::isfinite(val), ErrorKind::kTraining, "epoch " + std::to_string(epoch) + ": validation loss diverged");
    result.report.validationCurve.push_back(val);
    if (!improvedOnce || val < result.report.bestValidationQError) {
      improvedOnce = true;
      result.report.bestValidationQError = val;
      result.report.bestEpoch = epoch;
      result.params = params;
      sinceImprovement = 0;
    } else if (++sinceImprovement > cfg.patience) {
      break;
    }
  }
  result.report.wallSeconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

double predict(const CrnParams& params, const FeatureSpace& space, const Query& q1, const Query& q2) {
  check(sameFrom(q1, q2), ErrorKind::kContainmentDomain,
        "containment needs identical FROM clauses: {" + fromKey(q1) + "} vs {" + fromKey(q2) + "}");
  check(space.width() == params.inputWidth(), ErrorKind::kShape, "feature space does not match the model");
  const VectorSet v1 = featurize(q1, space);
  const VectorSet v2 = featurize(q2, space);
  return forward(params, v1, v2);
}

} // namespace cntcard
