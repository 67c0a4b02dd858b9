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
#include <cmath>
#include <numbers>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "smfd/image.hpp"
#include "smfd/random.hpp"
#include "smfd/tensor.hpp"

namespace smfd {

enum class BlurKind { gaussian, motion };
enum class MotionDirection { horizontal, vertical, diagonal, anti_diagonal };
// Per-layer operation order: M, G->M, M->G, G->M->G.
enum class BlurSequence { M, GM, MG, GMG };

inline const char* to_string(BlurKind k) { return k == BlurKind::gaussian ? "gaussian" : "motion"; }

inline const char* to_string(MotionDirection d) {
  switch (d) {
    case MotionDirection::horizontal: return "horizontal";
    case MotionDirection::vertical: return "vertical";
    case MotionDirection::diagonal: return "diagonal";
    case MotionDirection::anti_diagonal: return "anti_diagonal";
  }
  return "?";
}

inline const char* to_string(BlurSequence s) {
  switch (s) {
    case BlurSequence::M: return "M";
    case BlurSequence::GM: return "GM";
    case BlurSequence::MG: return "MG";
    case BlurSequence::GMG: return "GMG";
  }
  return "?";
}

inline std::vector<BlurKind> sequence_kinds(BlurSequence s) {
  using K = BlurKind;
  switch (s) {
    case BlurSequence::M: return {K::motion};
    case BlurSequence::GM: return {K::gaussian, K::motion};
    case BlurSequence::MG: return {K::motion, K::gaussian};
    case BlurSequence::GMG: return {K::gaussian, K::motion, K::gaussian};
  }
  return {};
}

// Conventional size rule: sigma = 0.3 * ((k - 1) / 2 - 1) + 0.8.
inline double gaussian_sigma(int kernel_size) { return 0.3 * ((kernel_size - 1) * 0.5 - 1.0) + 0.8; }

struct BlurOp {
  BlurKind kind = BlurKind::gaussian;
  int kernel_size = 15;
  std::optional<MotionDirection> direction;  // motion only

  double sigma() const { return gaussian_sigma(kernel_size); }
  bool operator==(const BlurOp&) const = default;
};

struct BlurLayer {
  BlurSequence sequence = BlurSequence::M;
  std::vector<BlurOp> ops;
  bool operator==(const BlurLayer&) const = default;
};

struct DegradationPlan {
  std::vector<BlurLayer> layers;
  double scale = 2.0;
  double noise_sigma = 5.0;
  std::uint64_t seed = 0;
  bool operator==(const DegradationPlan&) const = default;
};

struct DegradeConfig {
  std::vector<int> kernel_sizes{15, 21, 25, 31, 35, 41};
  int max_layers = 3;
  double scale_min = 2.0, scale_max = 4.0;
  double noise_min = 5.0, noise_max = 10.0;

  void validate() const {
    if (kernel_sizes.empty()) throw InputError("degrade config: empty kernel set");
    for (int k : kernel_sizes)
      if (k <= 0 || k % 2 == 0) throw InputError("degrade config: kernel sizes must be odd, got " + std::to_string(k));
    if (max_layers < 1) throw InputError("degrade config: max_layers must be >= 1");
    if (!(scale_min <= scale_max) || !(noise_min <= noise_max) || scale_min <= 0 || noise_min < 0)
      throw InputError("degrade config: bad scale/noise range");
  }
};

// Throws unless the plan satisfies the structural invariants and the config's ranges.
inline void validate_plan(const DegradationPlan& plan, const DegradeConfig& cfg = {}) {
  if (plan.layers.empty() || static_cast<int>(plan.layers.size()) > cfg.max_layers)
    throw InputError("plan has " + std::to_string(plan.layers.size()) + " layers, allowed 1.." +
                     std::to_string(cfg.max_layers));
  for (const auto& layer : plan.layers) {
    const auto kinds = sequence_kinds(layer.sequence);
    if (kinds.size() != layer.ops.size()) throw InputError("plan layer does not spell its sequence");
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      const auto& op = layer.ops[i];
      if (op.kind != kinds[i] || op.direction.has_value() != (op.kind == BlurKind::motion))
        throw InputError("plan layer op " + std::to_string(i) + " does not match sequence " + to_string(layer.sequence));
      if (std::find(cfg.kernel_sizes.begin(), cfg.kernel_sizes.end(), op.kernel_size) == cfg.kernel_sizes.end())
        throw InputError("kernel size " + std::to_string(op.kernel_size) + " not in configured set");
    }
  }
  if (plan.scale < cfg.scale_min || plan.scale > cfg.scale_max) throw InputError("plan scale out of range");
  if (plan.noise_sigma < cfg.noise_min || plan.noise_sigma > cfg.noise_max)
    throw InputError("plan noise level out of range");
}

// k x k kernel. Gaussian: sampled 2D Gaussian renormalized to unit sum.
// Motion: a line of 1/k through the centre along the direction.
inline Tensor<double> make_kernel(const BlurOp& op) {
  const int k = op.kernel_size;
  if (k <= 0 || k % 2 == 0) throw InputError("blur kernel size must be odd and positive, got " + std::to_string(k));
  const int r = k / 2;
  Tensor<double> ker({k, k});
  if (op.kind == BlurKind::gaussian) {
    const double s2 = 2.0 * op.sigma() * op.sigma();
    double sum = 0;
    for (int y = -r; y <= r; ++y)
      for (int x = -r; x <= r; ++x)
        sum += ker[(y + r) * k + x + r] = std::exp(-(x * x + y * y) / s2) / (std::numbers::pi * s2);
    for (std::size_t i = 0; i < ker.size(); ++i) ker[i] /= sum;
    return ker;
  }
  if (!op.direction) throw InputError("motion blur needs a direction");
  for (int t = 0; t < k; ++t) {
    int y = r, x = t;
    switch (*op.direction) {
      case MotionDirection::horizontal: break;
      case MotionDirection::vertical: y = t, x = r; break;
      case MotionDirection::diagonal: y = t; break;
      case MotionDirection::anti_diagonal: y = t, x = k - 1 - t; break;
    }
    ker[y * k + x] = 1.0 / k;
  }
  return ker;
}

// Same-size convolution, out(i,j) = sum K(m,n) I(i-m, j-n), reflect-101 borders,
// saturated to [0, 255].
inline Tensor<double> blur(const Tensor<double>& image, const Tensor<double>& kernel) {
  require_image(image);
  if (kernel.rank() != 2 || kernel.dim(0) != kernel.dim(1) || kernel.dim(0) % 2 == 0)
    throw ShapeError("blur kernel must be odd and square, got " + to_string(kernel.shape()));
  const int h = image.dim(0), w = image.dim(1), c = image.dim(2), k = kernel.dim(0), r = k / 2;
  if (k > 2 * std::min(h, w))
    throw ShapeError("blur kernel " + std::to_string(k) + " larger than twice the image extent " + to_string(image.shape()));
  struct Tap {
    int dy, dx;
    double w;
  };
  std::vector<Tap> taps;
  for (int m = -r; m <= r; ++m)
    for (int n = -r; n <= r; ++n)
      if (const double v = kernel[(m + r) * k + n + r]; v != 0.0) taps.push_back({-m, -n, v});
  Tensor<double> out(image.shape());
  std::vector<double> acc(c);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (const Tap& t : taps) {
        const double* px = image.data().data() +
                           (static_cast<std::size_t>(reflect101(y + t.dy, h)) * w + reflect101(x + t.dx, w)) * c;
        for (int ch = 0; ch < c; ++ch) acc[ch] += t.w * px[ch];
      }
      double* o = out.data().data() + (static_cast<std::size_t>(y) * w + x) * c;
      for (int ch = 0; ch < c; ++ch) o[ch] = std::clamp(acc[ch], 0.0, 255.0);
    }
  return out;
}

// Draw order from Rng(seed): layer count; per layer its sequence, then per op the kernel
// size index and (motion only) the direction; then scale; then noise level.
inline DegradationPlan sample_plan(std::uint64_t seed, const DegradeConfig& cfg = {}) {
  cfg.validate();
  Rng rng(seed);
  DegradationPlan plan;
  plan.seed = seed;
  const int layers = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.max_layers)));
  for (int l = 0; l < layers; ++l) {
    BlurLayer layer;
    layer.sequence = static_cast<BlurSequence>(rng.below(4));
    for (BlurKind kind : sequence_kinds(layer.sequence)) {
      BlurOp op;
      op.kind = kind;
      op.kernel_size = cfg.kernel_sizes[rng.below(cfg.kernel_sizes.size())];
      if (kind == BlurKind::motion) op.direction = static_cast<MotionDirection>(rng.below(4));
      layer.ops.push_back(op);
    }
    plan.layers.push_back(std::move(layer));
  }
  plan.scale = rng.uniform_closed(cfg.scale_min, cfg.scale_max);
  plan.noise_sigma = rng.uniform_closed(cfg.noise_min, cfg.noise_max);
  return plan;
}

inline constexpr std::uint64_t kNoiseStream = 0x6E6F697365ULL;

// blur layers -> bilinear down by `scale` and back up -> + noise_sigma * N(0,1) -> clamp.
// Scale <= 1 skips resampling; noise_sigma <= 0 skips noise. Noise is drawn in row-major
// (y, x, channel) order from Rng(derive_seed(plan.seed, kNoiseStream)).
inline Tensor<double> apply_plan(const Tensor<double>& image, const DegradationPlan& plan) {
  require_image(image);
  const int h = image.dim(0), w = image.dim(1);
  if (h < 16 || w < 16) throw ShapeError("apply_plan needs images of at least 16x16, got " + to_string(image.shape()));
  Tensor<double> img = image;
  for (const auto& layer : plan.layers)
    for (const auto& op : layer.ops) img = blur(img, make_kernel(op));
  if (plan.scale > 1.0) {
    const int sh = std::max(1, static_cast<int>(std::lround(h / plan.scale)));
    const int sw = std::max(1, static_cast<int>(std::lround(w / plan.scale)));
    img = resize_bilinear(resize_bilinear(img, sh, sw), h, w);
  }
  if (plan.noise_sigma > 0.0) {
    Rng rng(derive_seed(plan.seed, kNoiseStream));
    for (std::size_t i = 0; i < img.size(); ++i) img[i] += plan.noise_sigma * rng.normal();
  }
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = std::clamp(img[i], 0.0, 255.0);
  return img;
}

}  // namespace smfd
