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

#include <limits>
#include <optional>
#include <string>

#include "smfd/tensor.hpp"

namespace smfd {

enum class PoolMode { max, avg };

// Per output cell, the flat input index of the maximum picked inside its window.
struct PoolSwitches {
  Shape input_shape;
  Shape output_shape;
  int window = 2;
  int stride = 2;
  std::vector<std::size_t> index;

  // Throws unless every index lies inside the window of its output cell.
  void validate() const {
    if (input_shape.size() != 4 || output_shape.size() != 4)
      throw ShapeError("pool switches need rank-4 input and output shapes");
    if (index.size() != shape_size(output_shape))
      throw ShapeError("pool switches: " + std::to_string(index.size()) + " indices for output " +
                       to_string(output_shape));
    const int ih = input_shape[1], iw = input_shape[2], c = input_shape[3];
    const int oh = output_shape[1], ow = output_shape[2];
    if (output_shape[0] != input_shape[0] || output_shape[3] != c)
      throw ShapeError("pool switches: batch/channel mismatch");
    for (std::size_t o = 0; o < index.size(); ++o) {
      const std::size_t i = index[o];
      const int oc = static_cast<int>(o % c), ox = static_cast<int>((o / c) % ow);
      const int oy = static_cast<int>((o / c / ow) % oh), on = static_cast<int>(o / c / ow / oh);
      const int ic = static_cast<int>(i % c), ix = static_cast<int>((i / c) % iw);
      const int iy = static_cast<int>((i / c / iw) % ih), in = static_cast<int>(i / c / iw / ih);
      const bool inside = in == on && ic == oc && iy >= oy * stride && iy < oy * stride + window &&
                          ix >= ox * stride && ix < ox * stride + window &&
                          i < shape_size(input_shape);
      if (!inside)
        throw ShapeError("pool switch " + std::to_string(o) + " points outside its window");
    }
  }
};

template <typename T>
struct PoolResult {
  Tensor<T> output;
  std::optional<PoolSwitches> switches;
};

// Windowed max/avg pooling without padding. Ties resolve to the first cell in row-major order.
template <typename T>
PoolResult<T> pool2d(const Tensor<T>& input, int window, int stride, PoolMode mode) {
  if (window <= 0 || stride <= 0) throw InputError("pool2d: window and stride must be positive");
  const Nhwc in = nhwc(input);
  if (window > in.h || window > in.w)
    throw ShapeError("pool2d: window " + std::to_string(window) + " larger than spatial extent " +
                     to_string(input.shape()));
  const int oh = (in.h - window) / stride + 1, ow = (in.w - window) / stride + 1;
  PoolResult<T> r{Tensor<T>({in.n, oh, ow, in.c}), std::nullopt};
  PoolSwitches sw{input.shape(), r.output.shape(), window, stride, {}};
  if (mode == PoolMode::max) sw.index.resize(r.output.size());
  const T inv = T(1) / static_cast<T>(window * window);
  std::size_t o = 0;
  for (int n = 0; n < in.n; ++n)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox)
        for (int c = 0; c < in.c; ++c, ++o) {
          T best = -std::numeric_limits<T>::infinity(), sum = 0;
          std::size_t best_i = 0;
          for (int ky = 0; ky < window; ++ky)
            for (int kx = 0; kx < window; ++kx) {
              const std::size_t i =
                  ((static_cast<std::size_t>(n) * in.h + oy * stride + ky) * in.w + ox * stride + kx) * in.c + c;
              const T v = input[i];
              sum += v;
              if (v > best || (ky == 0 && kx == 0)) best = v, best_i = i;
            }
          if (mode == PoolMode::max) {
            r.output[o] = best;
            sw.index[o] = best_i;
          } else {
            r.output[o] = sum * inv;
          }
        }
  if (mode == PoolMode::max) r.switches = std::move(sw);
  return r;
}

// Max mode routes each gradient to its switch; avg mode spreads it uniformly over the window.
template <typename T>
Tensor<T> pool2d_backward(const Shape& input_shape, const Tensor<T>& grad_out, int window, int stride,
                          PoolMode mode, const PoolSwitches* switches = nullptr) {
  Tensor<T> gx(input_shape);
  if (mode == PoolMode::max) {
    if (!switches) throw InputError("pool2d_backward: max mode needs switches");
    if (switches->index.size() != grad_out.size())
      throw ShapeError("pool2d_backward: switch count does not match gradient");
    for (std::size_t o = 0; o < grad_out.size(); ++o) gx[switches->index[o]] += grad_out[o];
    return gx;
  }
  const int h = input_shape[1], w = input_shape[2], c = input_shape[3];
  const Nhwc out = nhwc(grad_out, "grad_out");
  const T inv = T(1) / static_cast<T>(window * window);
  std::size_t o = 0;
  for (int n = 0; n < out.n; ++n)
    for (int oy = 0; oy < out.h; ++oy)
      for (int ox = 0; ox < out.w; ++ox)
        for (int k = 0; k < c; ++k, ++o)
          for (int ky = 0; ky < window; ++ky)
            for (int kx = 0; kx < window; ++kx)
              gx[((static_cast<std::size_t>(n) * h + oy * stride + ky) * w + ox * stride + kx) * c + k] +=
                  grad_out[o] * inv;
  return gx;
}

// Global spatial reduction to (N, 1, 1, C).
template <typename T>
Tensor<T> global_pool(const Tensor<T>& input, PoolMode mode) {
  const Nhwc in = nhwc(input);
  Tensor<T> out({in.n, 1, 1, in.c});
  const std::size_t hw = static_cast<std::size_t>(in.h) * in.w;
  for (int n = 0; n < in.n; ++n)
    for (int c = 0; c < in.c; ++c) {
      T acc = mode == PoolMode::max ? -std::numeric_limits<T>::infinity() : T(0);
      for (std::size_t p = 0; p < hw; ++p) {
        const T v = input[(n * hw + p) * in.c + c];
        acc = mode == PoolMode::max ? std::max(acc, v) : acc + v;
      }
      out[static_cast<std::size_t>(n) * in.c + c] = mode == PoolMode::max ? acc : acc / static_cast<T>(hw);
    }
  return out;
}

template <typename T>
Tensor<T> global_pool_backward(const Tensor<T>& input, const Tensor<T>& grad_out, PoolMode mode) {
  const Nhwc in = nhwc(input);
  Tensor<T> gx(input.shape());
  const std::size_t hw = static_cast<std::size_t>(in.h) * in.w;
  for (int n = 0; n < in.n; ++n)
    for (int c = 0; c < in.c; ++c) {
      const T g = grad_out[static_cast<std::size_t>(n) * in.c + c];
      if (mode == PoolMode::avg) {
        for (std::size_t p = 0; p < hw; ++p) gx[(n * hw + p) * in.c + c] += g / static_cast<T>(hw);
        continue;
      }
      std::size_t best = n * hw * in.c + c;
      for (std::size_t p = 1; p < hw; ++p) {
        const std::size_t i = (n * hw + p) * in.c + c;
        if (input[i] > input[best]) best = i;
      }
      gx[best] += g;
    }
  return gx;
}

// Reduction across channels to (N, H, W, 1).
template <typename T>
Tensor<T> channel_pool(const Tensor<T>& input, PoolMode mode) {
  const Nhwc in = nhwc(input);
  Tensor<T> out({in.n, in.h, in.w, 1});
  for (std::size_t p = 0; p < out.size(); ++p) {
    const T* v = input.data().data() + p * in.c;
    T acc = v[0];
    for (int c = 1; c < in.c; ++c) acc = mode == PoolMode::max ? std::max(acc, v[c]) : acc + v[c];
    out[p] = mode == PoolMode::max ? acc : acc / static_cast<T>(in.c);
  }
  return out;
}

template <typename T>
Tensor<T> channel_pool_backward(const Tensor<T>& input, const Tensor<T>& grad_out, PoolMode mode) {
  const Nhwc in = nhwc(input);
  Tensor<T> gx(input.shape());
  for (std::size_t p = 0; p < grad_out.size(); ++p) {
    const std::size_t base = p * in.c;
    if (mode == PoolMode::avg) {
      for (int c = 0; c < in.c; ++c) gx[base + c] = grad_out[p] / static_cast<T>(in.c);
      continue;
    }
    int best = 0;
    for (int c = 1; c < in.c; ++c)
      if (input[base + c] > input[base + best]) best = c;
    gx[base + best] = grad_out[p];
  }
  return gx;
}

}  // namespace smfd
