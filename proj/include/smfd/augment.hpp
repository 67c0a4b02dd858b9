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
#include <cstdint>
#include <numbers>

#include "smfd/image.hpp"
#include "smfd/maskops.hpp"
#include "smfd/random.hpp"

namespace smfd {

// Sampling ranges; validate() rejects anything wider than the stated training ranges.
struct AugmentSpec {
  double max_rotation_deg = 30.0;
  double flip_probability = 0.5;
  double crop_min = 0.8, crop_max = 1.0;
  double brightness_min = 0.7, brightness_max = 1.3;
  double contrast_min = 0.7, contrast_max = 1.3;
  std::uint64_t seed = 0;

  void validate() const {
    auto within = [](double lo, double hi, double a, double b) { return a <= lo && lo <= hi && hi <= b; };
    if (!(max_rotation_deg >= 0 && max_rotation_deg <= 30)) throw InputError("augment rotation must lie in [0, 30] degrees");
    if (!(flip_probability >= 0 && flip_probability <= 1)) throw InputError("augment flip probability outside [0, 1]");
    if (!within(crop_min, crop_max, 0.8, 1.0)) throw InputError("augment crop scale outside [0.8, 1]");
    if (!within(brightness_min, brightness_max, 0.7, 1.3)) throw InputError("augment brightness outside [0.7, 1.3]");
    if (!within(contrast_min, contrast_max, 0.7, 1.3)) throw InputError("augment contrast outside [0.7, 1.3]");
  }
};

// One concrete draw. Crop offsets are fractions of the free margin.
struct AugmentDraw {
  double angle_deg = 0;
  bool flip = false;
  double crop_scale = 1.0;
  double crop_y = 0.5, crop_x = 0.5;
  double brightness = 1.0, contrast = 1.0;

  bool operator==(const AugmentDraw&) const = default;
};

inline AugmentDraw sample_augment(const AugmentSpec& spec, std::uint64_t draw_seed) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, draw_seed));
  AugmentDraw d;
  d.angle_deg = rng.uniform_closed(-spec.max_rotation_deg, spec.max_rotation_deg);
  d.flip = rng.uniform() < spec.flip_probability;
  d.crop_scale = rng.uniform_closed(spec.crop_min, spec.crop_max);
  d.crop_y = rng.uniform_closed(0, 1);
  d.crop_x = rng.uniform_closed(0, 1);
  d.brightness = rng.uniform_closed(spec.brightness_min, spec.brightness_max);
  d.contrast = rng.uniform_closed(spec.contrast_min, spec.contrast_max);
  return d;
}

namespace detail {

// Source coordinate of output pixel (y, x) under a rotation by `deg` about the image centre.
struct Rotation {
  double cy, cx, c, s;
  Rotation(int h, int w, double deg)
      : cy((h - 1) * 0.5), cx((w - 1) * 0.5), c(std::cos(deg * std::numbers::pi / 180)),
        s(std::sin(deg * std::numbers::pi / 180)) {}
  double src_y(int y, int x) const { return cy - s * (x - cx) + c * (y - cy); }
  double src_x(int y, int x) const { return cx + c * (x - cx) + s * (y - cy); }
};

// Bilinear, neighbours outside the image read as 0.
inline Tensor<float> rotate_image(const Tensor<float>& img, double deg) {
  const int h = img.dim(0), w = img.dim(1), ch = img.dim(2);
  const Rotation r(h, w, deg);
  Tensor<float> out(img.shape());
  auto px = [&](int y, int x, int k) -> double {
    if (y < 0 || y >= h || x < 0 || x >= w) return 0.0;
    return img[(static_cast<std::size_t>(y) * w + x) * ch + k];
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double fy = r.src_y(y, x), fx = r.src_x(y, x);
      const int y0 = static_cast<int>(std::floor(fy)), x0 = static_cast<int>(std::floor(fx));
      const double ay = fy - y0, ax = fx - x0;
      for (int k = 0; k < ch; ++k) {
        const double top = px(y0, x0, k) * (1 - ax) + px(y0, x0 + 1, k) * ax;
        const double bot = px(y0 + 1, x0, k) * (1 - ax) + px(y0 + 1, x0 + 1, k) * ax;
        out[(static_cast<std::size_t>(y) * w + x) * ch + k] = static_cast<float>(top * (1 - ay) + bot * ay);
      }
    }
  return out;
}

// Nearest, label 0 outside the image.
inline LabelMask rotate_mask(const LabelMask& m, double deg) {
  const Rotation r(m.height, m.width, deg);
  LabelMask out(m.height, m.width, std::uint8_t{0}, m.space);
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      const long sy = std::lround(r.src_y(y, x)), sx = std::lround(r.src_x(y, x));
      if (sy >= 0 && sy < m.height && sx >= 0 && sx < m.width)
        out.labels[static_cast<std::size_t>(y) * m.width + x] = m.at(static_cast<int>(sy), static_cast<int>(sx));
    }
  return out;
}

template <typename V>
std::vector<V> flip_rows(const std::vector<V>& src, int h, int w, int c) {
  std::vector<V> out(src.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int k = 0; k < c; ++k)
        out[(static_cast<std::size_t>(y) * w + x) * c + k] = src[(static_cast<std::size_t>(y) * w + (w - 1 - x)) * c + k];
  return out;
}

struct CropBox {
  int y0, x0, h, w;
};

inline CropBox crop_box(int h, int w, const AugmentDraw& d) {
  const int ch = std::clamp(static_cast<int>(std::lround(d.crop_scale * h)), 1, h);
  const int cw = std::clamp(static_cast<int>(std::lround(d.crop_scale * w)), 1, w);
  return {static_cast<int>(std::lround(d.crop_y * (h - ch))), static_cast<int>(std::lround(d.crop_x * (w - cw))), ch, cw};
}

template <typename V>
std::vector<V> crop_rows(const std::vector<V>& src, int w, int c, const CropBox& b) {
  std::vector<V> out;
  out.reserve(static_cast<std::size_t>(b.h) * b.w * c);
  for (int y = b.y0; y < b.y0 + b.h; ++y) {
    const auto row = src.begin() + (static_cast<std::ptrdiff_t>(y) * w + b.x0) * c;
    out.insert(out.end(), row, row + static_cast<std::ptrdiff_t>(b.w) * c);
  }
  return out;
}

inline Tensor<float> geometric(const Tensor<float>& img, const AugmentDraw& d) {
  const int h = img.dim(0), w = img.dim(1), c = img.dim(2);
  Tensor<float> out = d.angle_deg == 0 ? img : rotate_image(img, d.angle_deg);
  if (d.flip) out = Tensor<float>(out.shape(), flip_rows(out.values(), h, w, c));
  if (d.crop_scale != 1.0) {
    const auto box = crop_box(h, w, d);
    out = resize_bilinear(Tensor<float>({box.h, box.w, c}, crop_rows(out.values(), w, c, box)), h, w);
  }
  return out;
}

inline LabelMask geometric(const LabelMask& m, const AugmentDraw& d) {
  LabelMask out = d.angle_deg == 0 ? m : rotate_mask(m, d.angle_deg);
  if (d.flip) out.labels = flip_rows(out.labels, m.height, m.width, 1);
  if (d.crop_scale != 1.0) {
    const auto box = crop_box(m.height, m.width, d);
    out = resize_mask(LabelMask(box.h, box.w, crop_rows(out.labels, m.width, 1, box), m.space), m.height, m.width);
  }
  return out;
}

// x * b, then contrast about `pivot`, clamped to [0, 1].
inline Tensor<float> photometric(Tensor<float> img, const AugmentDraw& d, double pivot) {
  for (auto& v : img.data())
    v = static_cast<float>(std::clamp((static_cast<double>(v) * d.brightness - pivot) * d.contrast + pivot, 0.0, 1.0));
  return img;
}

}  // namespace detail

// Geometry hits sharp, blurry and mask alike. Photometry hits both images with one affine
// map pivoted on the blurry image's brightened mean, so the target stays consistent
// with the input. Gray and one-hot views are rebuilt from the results.
inline TrainingPair apply_augment(const TrainingPair& pair, const AugmentDraw& d) {
  if (d == AugmentDraw{}) return pair;
  TrainingPair out;
  out.sharp = detail::geometric(pair.sharp, d);
  out.blurry = detail::geometric(pair.blurry, d);
  out.mask = detail::geometric(pair.mask, d);
  double mean = 0;
  for (float v : out.blurry.data()) mean += v;
  const double pivot = mean / static_cast<double>(out.blurry.size()) * d.brightness;
  out.sharp = detail::photometric(std::move(out.sharp), d, pivot);
  out.blurry = detail::photometric(std::move(out.blurry), d, pivot);
  out.blurry_gray = to_grayscale(out.blurry);
  out.mask_onehot = one_hot<float>(out.mask, label_count(out.mask.space));
  return out;
}

inline TrainingPair augment(const TrainingPair& pair, const AugmentSpec& spec, std::uint64_t draw_seed) {
  return apply_augment(pair, sample_augment(spec, draw_seed));
}

}  // namespace smfd
