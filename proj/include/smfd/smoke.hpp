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

#include <cmath>
#include <charconv>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "smfd/degrade.hpp"
#include "smfd/maskops.hpp"
#include "smfd/metrics.hpp"
#include "smfd/nets/executor.hpp"
#include "smfd/nets/networks.hpp"
#include "smfd/train.hpp"

namespace smfd {

// Cartoon faces with one region per merged label: an ellipse (1), a band across it (2), a
// cap above it (3) and a block below it (4) on background 0. Each label gets a distinct
// luminance plus a smooth texture; the blurry image is a Gaussian blur with light noise.
inline std::vector<TrainingPair> synthetic_pairs(int count, int size, std::uint64_t seed) {
  if (count < 1 || size < 8) throw InputError("synthetic_pairs needs count >= 1 and size >= 8");
  static constexpr double kLuma[kMergedLabels] = {0.15, 0.65, 0.9, 0.35, 0.5};
  const auto kernel = make_kernel(BlurOp{BlurKind::gaussian, 5, std::nullopt});
  std::vector<TrainingPair> out;
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    const double cy = size * rng.uniform(0.45, 0.55), cx = size * rng.uniform(0.42, 0.58);
    const double ry = size * rng.uniform(0.25, 0.32), rx = size * rng.uniform(0.2, 0.27);
    const double eye = cy - ry * rng.uniform(0.1, 0.3);
    std::vector<std::uint8_t> labels(static_cast<std::size_t>(size) * size, 0);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const double u = (y - cy) / ry, v = (x - cx) / rx;
        std::uint8_t l = 0;
        if (y > cy && std::abs(x - cx) < rx * 0.45) l = 4;
        if (u * u + v * v < 1.44 && y < cy) l = 3;
        if (u * u + v * v < 1.0) l = 1;
        if (l == 1 && std::abs(y - eye) < size * 0.05) l = 2;
        labels[static_cast<std::size_t>(y) * size + x] = l;
      }
    double tint[kMergedLabels][3];
    for (auto& t : tint)
      for (double& c : t) c = rng.uniform(0.85, 1.15);
    const double fy = rng.uniform(0.2, 0.6), fx = rng.uniform(0.2, 0.6), phase = rng.uniform(0, 6.28);
    Tensor<double> sharp({size, size, 3});
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const int l = labels[static_cast<std::size_t>(y) * size + x];
        const double tex = 0.06 * std::sin(fy * y + fx * x + phase);
        for (int k = 0; k < 3; ++k)
          sharp[(static_cast<std::size_t>(y) * size + x) * 3 + k] = std::clamp(kLuma[l] * tint[l][k] + tex, 0.0, 1.0);
      }
    auto blurry = blur(sharp, kernel);
    for (auto& v : blurry.data()) v = std::clamp(v + 0.01 * rng.normal(), 0.0, 1.0);
    TrainingPair p;
    p.sharp = sharp.cast<float>();
    p.blurry = blurry.cast<float>();
    p.blurry_gray = to_grayscale(p.blurry);
    p.mask = LabelMask(size, size, std::move(labels), LabelSpace::merged5);
    p.mask_onehot = one_hot<float>(p.mask, kMergedLabels);
    out.push_back(std::move(p));
  }
  return out;
}

// Toy network scale accepted by train_smoke.
inline NetConfig smoke_config(int size = 32) {
  NetConfig c;
  c.base_channels = 8;
  c.rdc_growth = 4;
  c.image_size = size;
  return c;
}

struct SmokeOptions {
  int steps = 200;
  int eval_every = 10;  // steps per evaluation epoch
  double lr = 5e-3;     // toy scale; at 1e-3 some seeds barely halve the restoration loss in 200 steps
  std::uint64_t seed = 0;
};

struct TraceRow {
  int step = 0;
  double loss = 0;       // training loss before this step's update
  double best_loss = 0;  // running minimum of `loss`
  double lr = 0;
  std::optional<double> metric;  // evaluation epochs only
};

struct SmokeResult {
  TensorStore<float> weights, best;
  std::vector<TraceRow> trace;
  Monitor monitored = Monitor::dice;
  double best_metric = -std::numeric_limits<double>::infinity();
  int best_step = 0;
  double initial_loss = 0, final_loss = 0;  // inference-mode loss over the whole set
  bool diverged = false, stopped_early = false;
  std::string failure;  // why a diverged run stopped
};

namespace detail {

inline Tensor<float> stack(const std::vector<TrainingPair>& data, Tensor<float> TrainingPair::*field) {
  const Shape& s = (data.front().*field).shape();
  std::vector<float> v;
  for (const auto& p : data) {
    require_same_shape(p.*field, data.front().*field, "stack");
    v.insert(v.end(), (p.*field).values().begin(), (p.*field).values().end());
  }
  return Tensor<float>({static_cast<int>(data.size()), s[0], s[1], s[2]}, std::move(v));
}

inline Tensor<float> item(const Tensor<float>& batch, int n) {
  const std::size_t len = batch.size() / batch.dim(0);
  const auto first = batch.values().begin() + static_cast<std::ptrdiff_t>(len * n);
  return Tensor<float>({batch.dim(1), batch.dim(2), batch.dim(3)}, std::vector<float>(first, first + len));
}

}  // namespace detail

// Full-batch Adam on MSE (smfd_unet) or Dice loss (mask_generator). Every `eval_every`
// steps the monitored metric (SSIM or Dice) is measured in inference mode, feeding the
// plateau schedule, early stopping and the best checkpoint.
inline SmokeResult train_smoke(NetKind kind, const NetConfig& cfg, const std::vector<TrainingPair>& data,
                               const SmokeOptions& opt) {
  cfg.validate();
  if (cfg.image_size > 32 || cfg.base_channels > 8)
    throw InputError("train_smoke runs at toy scale only (image_size <= 32, base_channels <= 8)");
  if (data.empty()) throw InputError("train_smoke needs data");
  if (opt.steps < 0 || opt.eval_every < 1) throw InputError("train_smoke needs steps >= 0 and eval_every >= 1");
  for (const auto& p : data)
    if (p.sharp.dim(0) != cfg.image_size || p.sharp.dim(1) != cfg.image_size)
      throw ShapeError("training pairs must be " + std::to_string(cfg.image_size) + " pixels square");

  const bool mask = kind == NetKind::mask_generator;
  const auto g = build_network(kind, cfg);
  std::map<std::string, Tensor<float>> inputs;
  Tensor<float> target;
  if (mask) {
    inputs["image"] = detail::stack(data, &TrainingPair::blurry_gray);
    target = detail::stack(data, &TrainingPair::mask_onehot);
  } else {
    inputs["image"] = detail::stack(data, &TrainingPair::blurry);
    if (cfg.mask_branch) inputs["mask"] = detail::stack(data, &TrainingPair::mask_onehot);
    target = detail::stack(data, &TrainingPair::sharp);
  }
  auto loss_of = [&](const Tensor<float>& y) { return mask ? dice_loss(y, target) : mse_loss(y, target); };
  auto metric_of = [&](const Tensor<float>& y) {
    if (mask) return dice_jaccard(y, target).dice;
    double s = 0;
    for (int n = 0; n < y.dim(0); ++n) s += ssim(detail::item(y, n), detail::item(target, n), 1.0);
    return s / y.dim(0);
  };

  SmokeResult r;
  r.monitored = mask ? Monitor::dice : Monitor::ssim;
  r.weights = init_weights<float>(g, derive_seed(opt.seed, 1));
  r.best = r.weights;
  r.initial_loss = loss_of(forward(g, r.weights, inputs)).value;
  AdamState<float> adam;
  PlateauState plateau;
  plateau.monitored = r.monitored;
  plateau.lr = opt.lr;
  EarlyStopState stop;
  const ForwardOptions train{BnMode::train, false, true, true};
  double best_loss = std::numeric_limits<double>::infinity();

  for (int step = 1; step <= opt.steps; ++step) {
    const auto st = run_forward(g, r.weights, inputs, train);
    const auto loss = loss_of(st.output);
    if (!std::isfinite(loss.value)) {
      r.diverged = true;
      r.failure = "non-finite loss at step " + std::to_string(step);
      break;
    }
    best_loss = std::min(best_loss, loss.value);
    TraceRow row{step, loss.value, best_loss, plateau.lr, std::nullopt};
    adam.lr = plateau.lr;
    try {
      adam_step(adam, r.weights, backward(g, r.weights, st, loss.grad, train));
    } catch (const NumericError& e) {
      r.diverged = true;
      r.failure = "step " + std::to_string(step) + ": " + e.what();
      break;
    }
    for (const auto& [name, t] : st.running) r.weights.set(name, t);

    if (step % opt.eval_every == 0 || step == opt.steps) {
      const double m = metric_of(forward(g, r.weights, inputs));
      row.metric = m;
      if (improves(m, r.best_metric)) {
        r.best_metric = m;
        r.best_step = step;
        r.best = r.weights;
      }
      plateau = plateau_step(plateau, m);
      stop = early_stop_step(stop, m);
    }
    r.trace.push_back(row);
    if (stop.stopped) {
      r.stopped_early = true;
      break;
    }
  }
  r.final_loss = loss_of(forward(g, r.weights, inputs)).value;
  return r;
}

// step,loss,best_loss,lr,metric with shortest round-trip formatting; metric is blank
// outside evaluation epochs.
inline void write_trace_csv(const std::vector<TraceRow>& trace, std::ostream& os) {
  auto num = [](double v) {
    char buf[32];
    return std::string(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
  };
  os << "step,loss,best_loss,lr,metric\n";
  for (const auto& r : trace)
    os << r.step << ',' << num(r.loss) << ',' << num(r.best_loss) << ',' << num(r.lr) << ','
       << (r.metric ? num(*r.metric) : "") << '\n';
}

}  // namespace smfd
