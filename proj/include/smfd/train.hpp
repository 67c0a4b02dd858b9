// Copyright 2026 The SMFD Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "smfd/error.hpp"
#include "smfd/nets/store.hpp"
#include "smfd/random.hpp"
#include "smfd/tensor.hpp"

namespace smfd {

// Adam with bias correction. Moments live in double whatever the weight type.
template <typename T>
struct AdamState {
  std::uint64_t t = 0;
  double lr = 1e-3;
  double beta1 = 0.9, beta2 = 0.999;
  double eps = 1e-8;
  TensorStore<double> m, v;
};

// Updates every parameter named in `grads`; others (running statistics) are left alone.
// All gradients are checked before anything changes, so a rejected step is a no-op.
template <typename T>
void adam_step(AdamState<T>& s, TensorStore<T>& params, const TensorStore<T>& grads) {
  for (const auto& [name, g] : grads) {
    if (!params.contains(name)) throw InputError("gradient for unknown parameter '" + name + "'");
    if (params.at(name).shape() != g.shape())
      throw ShapeError("gradient '" + name + "' has shape " + to_string(g.shape()) + ", parameter has " +
                       to_string(params.at(name).shape()));
    for (T x : g.data())
      if (!std::isfinite(static_cast<double>(x))) throw NumericError("non-finite gradient for parameter '" + name + "'");
  }
  ++s.t;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
  for (const auto& [name, g] : grads) {
    if (!s.m.contains(name)) {
      s.m.insert(name, Tensor<double>(g.shape()));
      s.v.insert(name, Tensor<double>(g.shape()));
    }
    auto& m = s.m.at(name);
    auto& v = s.v.at(name);
    auto& p = params.at(name);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double gi = static_cast<double>(g[i]);
      m[i] = s.beta1 * m[i] + (1 - s.beta1) * gi;
      v[i] = s.beta2 * v[i] + (1 - s.beta2) * gi * gi;
      const double mhat = m[i] / c1, vhat = v[i] / c2;
      p[i] = static_cast<T>(static_cast<double>(p[i]) - s.lr * mhat / (std::sqrt(vhat) + s.eps));
    }
  }
}

// Both state machines watch a maximize-mode metric. Improvement needs a margin so
// float noise does not reset the counters.
inline constexpr double kImprovementMargin = 1e-8;

inline bool improves(double metric, double best) {
  if (std::isnan(metric)) return false;
  return best == -std::numeric_limits<double>::infinity() ? metric > best : metric >= best + kImprovementMargin;
}

enum class Monitor { dice, ssim };

inline const char* to_string(Monitor m) { return m == Monitor::dice ? "dice" : "ssim"; }

struct PlateauState {
  Monitor monitored = Monitor::dice;
  double best = -std::numeric_limits<double>::infinity();
  int stall = 0;
  double lr = 1e-3;
  double factor = 0.2;
  int patience = 5;
  double floor = 1e-9;
};

inline PlateauState plateau_step(PlateauState s, double metric) {
  if (improves(metric, s.best)) {
    s.best = metric;
    s.stall = 0;
    return s;
  }
  if (++s.stall >= s.patience) {
    s.lr = std::max(s.lr * s.factor, s.floor);
    s.stall = 0;
  }
  return s;
}

struct EarlyStopState {
  double best = -std::numeric_limits<double>::infinity();
  int stall = 0;
  int patience = 10;
  bool stopped = false;
};

inline EarlyStopState early_stop_step(EarlyStopState s, double metric) {
  if (s.stopped) return s;
  if (improves(metric, s.best)) {
    s.best = metric;
    s.stall = 0;
  } else {
    ++s.stall;
  }
  s.stopped = s.stall >= s.patience;
  return s;
}

inline constexpr int kFolds = 5;

struct FoldPlan {
  std::vector<int> test;
  std::array<std::vector<int>, kFolds> folds;

  // Training indices when fold `k` validates.
  std::vector<int> train_for(int k) const {
    if (k < 0 || k >= kFolds) throw InputError("fold index out of range");
    std::vector<int> out;
    for (int f = 0; f < kFolds; ++f)
      if (f != k) out.insert(out.end(), folds[f].begin(), folds[f].end());
    std::sort(out.begin(), out.end());
    return out;
  }
};

// Fisher-Yates shuffle, then a rounded 20% test slice and five balanced folds.
inline FoldPlan kfold_split(int n, std::uint64_t seed) {
  if (n < 10) throw InputError("kfold_split needs at least 10 items, got " + std::to_string(n));
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (int i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  FoldPlan plan;
  const int test = (n + 2) / 5;
  plan.test.assign(order.begin(), order.begin() + test);
  std::sort(plan.test.begin(), plan.test.end());
  const int pool = n - test;
  for (int f = 0; f < kFolds; ++f) {
    auto& fold = plan.folds[f];
    fold.assign(order.begin() + test + f * pool / kFolds, order.begin() + test + (f + 1) * pool / kFolds);
    std::sort(fold.begin(), fold.end());
  }
  return plan;
}

template <typename T>
struct LossResult {
  double value = 0;
  Tensor<T> grad;  // d(value)/d(pred)
};

template <typename T>
LossResult<T> mse_loss(const Tensor<T>& pred, const Tensor<T>& target) {
  require_same_shape(pred, target, "mse_loss");
  LossResult<T> r{0, Tensor<T>(pred.shape())};
  const double n = static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = static_cast<double>(pred[i]) - static_cast<double>(target[i]);
    r.value += d * d / n;
    r.grad[i] = static_cast<T>(2 * d / n);
  }
  return r;
}

// 1 - mean over channels of 2I/(P+T), soft counts over every other axis. A channel that
// is empty in both inputs scores 1 and passes no gradient.
template <typename T>
LossResult<T> dice_loss(const Tensor<T>& pred, const Tensor<T>& truth) {
  require_same_shape(pred, truth, "dice_loss");
  const int c = pred.dim(-1);
  std::vector<double> inter(c), sum(c);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const int ch = static_cast<int>(i % c);
    inter[ch] += static_cast<double>(pred[i]) * static_cast<double>(truth[i]);
    sum[ch] += static_cast<double>(pred[i]) + static_cast<double>(truth[i]);
  }
  LossResult<T> r{1.0, Tensor<T>(pred.shape())};
  for (int ch = 0; ch < c; ++ch) r.value -= (sum[ch] == 0 ? 1.0 : 2 * inter[ch] / sum[ch]) / c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const int ch = static_cast<int>(i % c);
    if (sum[ch] == 0) continue;
    const double t = static_cast<double>(truth[i]);
    r.grad[i] = static_cast<T>(-2 * (t * sum[ch] - inter[ch]) / (sum[ch] * sum[ch]) / c);
  }
  return r;
}

}  // namespace smfd
