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
#include <string>
#include <vector>

#include "smfd/tensor.hpp"

namespace smfd {

// Images are rank-3 (H, W, C) tensors; pixel range depends on the caller ([0,255] or [0,1]).

template <typename T>
void require_image(const Tensor<T>& img, const char* what = "image") {
  if (img.rank() != 3) throw ShapeError(std::string(what) + " must be rank 3 (H,W,C), got " + to_string(img.shape()));
}

// Reflect-101 border: -1 -> 1, n -> n - 2. Valid while |overhang| < n.
inline int reflect101(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) i = i < 0 ? -i : 2 * (n - 1) - i;
  return i;
}

// Bilinear resampling with half-pixel centers and clamp-to-edge sampling.
template <typename T>
Tensor<T> resize_bilinear(const Tensor<T>& img, int out_h, int out_w) {
  require_image(img);
  const int h = img.dim(0), w = img.dim(1), c = img.dim(2);
  if (out_h == h && out_w == w) return img;
  Tensor<T> out({out_h, out_w, c});
  const double sy = static_cast<double>(h) / out_h, sx = static_cast<double>(w) / out_w;
  for (int y = 0; y < out_h; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(h - 1));
    const int y0 = static_cast<int>(fy), y1 = std::min(y0 + 1, h - 1);
    const double ay = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(w - 1));
      const int x0 = static_cast<int>(fx), x1 = std::min(x0 + 1, w - 1);
      const double ax = fx - x0;
      for (int k = 0; k < c; ++k) {
        auto px = [&](int yy, int xx) { return static_cast<double>(img[(static_cast<std::size_t>(yy) * w + xx) * c + k]); };
        const double top = px(y0, x0) * (1 - ax) + px(y0, x1) * ax;
        const double bot = px(y1, x0) * (1 - ax) + px(y1, x1) * ax;
        out[(static_cast<std::size_t>(y) * out_w + x) * c + k] = static_cast<T>(top * (1 - ay) + bot * ay);
      }
    }
  }
  return out;
}

// Nearest-neighbour resampling of a row-major h x w grid with `c` values per cell.
template <typename V>
std::vector<V> resize_nearest(const std::vector<V>& src, int h, int w, int c, int out_h, int out_w) {
  std::vector<V> out(static_cast<std::size_t>(out_h) * out_w * c);
  for (int y = 0; y < out_h; ++y) {
    const int sy = std::min(static_cast<int>((y + 0.5) * h / out_h), h - 1);
    for (int x = 0; x < out_w; ++x) {
      const int sx = std::min(static_cast<int>((x + 0.5) * w / out_w), w - 1);
      for (int k = 0; k < c; ++k)
        out[(static_cast<std::size_t>(y) * out_w + x) * c + k] = src[(static_cast<std::size_t>(sy) * w + sx) * c + k];
    }
  }
  return out;
}

template <typename T>
Tensor<T> resize_nearest(const Tensor<T>& img, int out_h, int out_w) {
  require_image(img);
  return Tensor<T>({out_h, out_w, img.dim(2)},
                   resize_nearest(img.values(), img.dim(0), img.dim(1), img.dim(2), out_h, out_w));
}

// BT.601 luma.
template <typename T>
Tensor<T> to_grayscale(const Tensor<T>& rgb) {
  require_image(rgb, "rgb image");
  if (rgb.dim(2) != 3) throw ShapeError("to_grayscale expects 3 channels, got " + std::to_string(rgb.dim(2)));
  Tensor<T> out({rgb.dim(0), rgb.dim(1), 1});
  for (std::size_t p = 0; p < out.size(); ++p)
    out[p] = static_cast<T>(0.299 * rgb[3 * p] + 0.587 * rgb[3 * p + 1] + 0.114 * rgb[3 * p + 2]);
  return out;
}

template <typename T>
Tensor<T> from_bytes(const std::vector<std::uint8_t>& bytes, int h, int w, int c) {
  std::vector<T> v(bytes.begin(), bytes.end());
  return Tensor<T>({h, w, c}, std::move(v));
}

// Rounds half away from zero and saturates to [0, 255].
template <typename T>
std::vector<std::uint8_t> to_bytes(const Tensor<T>& img, double scale = 1.0) {
  std::vector<std::uint8_t> out(img.size());
  for (std::size_t i = 0; i < img.size(); ++i)
    out[i] = static_cast<std::uint8_t>(std::clamp(std::round(static_cast<double>(img[i]) * scale), 0.0, 255.0));
  return out;
}

}  // namespace smfd
