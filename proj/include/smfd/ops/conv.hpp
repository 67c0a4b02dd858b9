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

#include <string>

#include "smfd/tensor.hpp"

namespace smfd {

enum class PadMode { explicit_pad, valid, same };

struct Padding {
  int top = 0, bottom = 0, left = 0, right = 0;
};

// Output extent of a strided window sweep: floor((W - F + P_total) / S) + 1.
// With symmetric padding P this is the familiar floor((W - F + 2P) / S) + 1.
inline int conv_output_extent(int input, int filter, int pad_total, int stride) {
  const int span = input - filter + pad_total;
  if (span < 0) return 0;
  return span / stride + 1;
}

struct ConvGeometry {
  int filter_h = 3;
  int filter_w = 3;
  int in_ch = 1;
  int out_ch = 1;
  int stride = 1;
  PadMode pad_mode = PadMode::same;
  int padding = 0;  // used by PadMode::explicit_pad
  bool use_bias = true;

  Shape weight_shape() const { return {filter_h, filter_w, in_ch, out_ch}; }

  void validate() const {
    if (filter_h <= 0 || filter_w <= 0 || in_ch <= 0 || out_ch <= 0 || stride <= 0 || padding < 0)
      throw InputError("conv geometry must have positive filter, channels and stride");
  }

  // "same" pads so that out = ceil(in / S); an odd total puts the extra row/column
  // at the bottom/right.
  Padding resolve(int in_h, int in_w) const {
    Padding p;
    switch (pad_mode) {
      case PadMode::valid:
        break;
      case PadMode::explicit_pad:
        p = {padding, padding, padding, padding};
        break;
      case PadMode::same: {
        auto total = [&](int in, int f) {
          const int out = (in + stride - 1) / stride;
          return std::max((out - 1) * stride + f - in, 0);
        };
        const int th = total(in_h, filter_h), tw = total(in_w, filter_w);
        p = {th / 2, th - th / 2, tw / 2, tw - tw / 2};
        break;
      }
    }
    return p;
  }
};

template <typename T>
struct ConvSpec {
  ConvGeometry geom;
  Tensor<T> weights;  // (filter_h, filter_w, in_ch, out_ch)
  Tensor<T> bias;     // (out_ch), may be empty when geom.use_bias is false

  void validate() const {
    geom.validate();
    if (weights.shape() != geom.weight_shape())
      throw ShapeError("conv weights " + to_string(weights.shape()) + " do not match declared " +
                       to_string(geom.weight_shape()));
    if (geom.use_bias && bias.shape() != Shape{geom.out_ch})
      throw ShapeError("conv bias " + to_string(bias.shape()) + " does not match out_ch " +
                       std::to_string(geom.out_ch));
  }
};

template <typename T>
struct ConvGrads {
  Tensor<T> input;
  Tensor<T> weights;
  Tensor<T> bias;
};

namespace detail {

struct ConvPlan {
  Nhwc in;
  int oh, ow;
  Padding pad;
};

template <typename T>
ConvPlan plan_conv(const Tensor<T>& input, const ConvSpec<T>& spec) {
  spec.validate();
  const Nhwc in = nhwc(input);
  if (in.c != spec.geom.in_ch)
    throw ShapeError("conv2d: input has " + std::to_string(in.c) + " channels, filter expects " +
                     std::to_string(spec.geom.in_ch) + " (input " + to_string(input.shape()) + ")");
  const Padding pad = spec.geom.resolve(in.h, in.w);
  const int oh = conv_output_extent(in.h, spec.geom.filter_h, pad.top + pad.bottom, spec.geom.stride);
  const int ow = conv_output_extent(in.w, spec.geom.filter_w, pad.left + pad.right, spec.geom.stride);
  if (oh <= 0 || ow <= 0)
    throw ShapeError("conv2d: non-positive output extent for input " + to_string(input.shape()) +
                     " and filter " + std::to_string(spec.geom.filter_h) + "x" +
                     std::to_string(spec.geom.filter_w));
  return {in, oh, ow, pad};
}

}  // namespace detail

// Windowed dot product (cross-correlation) plus bias.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const ConvSpec<T>& spec) {
  const auto plan = detail::plan_conv(input, spec);
  const auto& g = spec.geom;
  const int ci = g.in_ch, co = g.out_ch;
  Tensor<T> out({plan.in.n, plan.oh, plan.ow, co});
  const T* x = input.data().data();
  const T* wt = spec.weights.data().data();
  T* y = out.data().data();
  for (int n = 0; n < plan.in.n; ++n)
    for (int oy = 0; oy < plan.oh; ++oy)
      for (int ox = 0; ox < plan.ow; ++ox) {
        T* o = y + ((static_cast<std::size_t>(n) * plan.oh + oy) * plan.ow + ox) * co;
        if (g.use_bias)
          for (int k = 0; k < co; ++k) o[k] = spec.bias[k];
        for (int ky = 0; ky < g.filter_h; ++ky) {
          const int iy = oy * g.stride - plan.pad.top + ky;
          if (iy < 0 || iy >= plan.in.h) continue;
          for (int kx = 0; kx < g.filter_w; ++kx) {
            const int ix = ox * g.stride - plan.pad.left + kx;
            if (ix < 0 || ix >= plan.in.w) continue;
            const T* xi = x + ((static_cast<std::size_t>(n) * plan.in.h + iy) * plan.in.w + ix) * ci;
            const T* wk = wt + (static_cast<std::size_t>(ky) * g.filter_w + kx) * ci * co;
            for (int c = 0; c < ci; ++c) {
              const T v = xi[c];
              const T* wr = wk + static_cast<std::size_t>(c) * co;
              for (int k = 0; k < co; ++k) o[k] += v * wr[k];
            }
          }
        }
      }
  return out;
}

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& input, const ConvSpec<T>& spec,
                             const Tensor<T>& grad_out) {
  const auto plan = detail::plan_conv(input, spec);
  const auto& g = spec.geom;
  const int ci = g.in_ch, co = g.out_ch;
  if (grad_out.shape() != Shape{plan.in.n, plan.oh, plan.ow, co})
    throw ShapeError("conv2d_backward: gradient shape " + to_string(grad_out.shape()));
  ConvGrads<T> grads{Tensor<T>(input.shape()), Tensor<T>(spec.weights.shape()),
                     g.use_bias ? Tensor<T>(Shape{co}) : Tensor<T>()};
  const T* x = input.data().data();
  const T* wt = spec.weights.data().data();
  const T* gy = grad_out.data().data();
  T* gx = grads.input.data().data();
  T* gw = grads.weights.data().data();
  for (int n = 0; n < plan.in.n; ++n)
    for (int oy = 0; oy < plan.oh; ++oy)
      for (int ox = 0; ox < plan.ow; ++ox) {
        const T* go = gy + ((static_cast<std::size_t>(n) * plan.oh + oy) * plan.ow + ox) * co;
        if (g.use_bias)
          for (int k = 0; k < co; ++k) grads.bias[k] += go[k];
        for (int ky = 0; ky < g.filter_h; ++ky) {
          const int iy = oy * g.stride - plan.pad.top + ky;
          if (iy < 0 || iy >= plan.in.h) continue;
          for (int kx = 0; kx < g.filter_w; ++kx) {
            const int ix = ox * g.stride - plan.pad.left + kx;
            if (ix < 0 || ix >= plan.in.w) continue;
            const std::size_t in_off = ((static_cast<std::size_t>(n) * plan.in.h + iy) * plan.in.w + ix) * ci;
            const std::size_t w_off = (static_cast<std::size_t>(ky) * g.filter_w + kx) * ci * co;
            for (int c = 0; c < ci; ++c) {
              const T v = x[in_off + c];
              const T* wr = wt + w_off + static_cast<std::size_t>(c) * co;
              T* gwr = gw + w_off + static_cast<std::size_t>(c) * co;
              T acc = 0;
              for (int k = 0; k < co; ++k) {
                acc += go[k] * wr[k];
                gwr[k] += v * go[k];
              }
              gx[in_off + c] += acc;
            }
          }
        }
      }
  return grads;
}

// Transposed convolution: every input cell scatter-adds a weighted copy of the kernel
// at stride spacing. Output extent (in - 1) * S + F; no cropping.
template <typename T>
Tensor<T> conv_transpose2d(const Tensor<T>& input, const ConvSpec<T>& spec) {
  spec.validate();
  const auto& g = spec.geom;
  const Nhwc in = nhwc(input);
  if (in.c != g.in_ch)
    throw ShapeError("conv_transpose2d: input has " + std::to_string(in.c) + " channels, expected " +
                     std::to_string(g.in_ch));
  const int oh = (in.h - 1) * g.stride + g.filter_h;
  const int ow = (in.w - 1) * g.stride + g.filter_w;
  const int ci = g.in_ch, co = g.out_ch;
  Tensor<T> out({in.n, oh, ow, co});
  T* y = out.data().data();
  if (g.use_bias)
    for (std::size_t i = 0; i < out.size(); ++i) y[i] = spec.bias[i % co];
  const T* x = input.data().data();
  const T* wt = spec.weights.data().data();
  for (int n = 0; n < in.n; ++n)
    for (int iy = 0; iy < in.h; ++iy)
      for (int ix = 0; ix < in.w; ++ix) {
        const T* xi = x + ((static_cast<std::size_t>(n) * in.h + iy) * in.w + ix) * ci;
        for (int ky = 0; ky < g.filter_h; ++ky)
          for (int kx = 0; kx < g.filter_w; ++kx) {
            const int oy = iy * g.stride + ky, ox = ix * g.stride + kx;
            T* o = y + ((static_cast<std::size_t>(n) * oh + oy) * ow + ox) * co;
            const T* wk = wt + (static_cast<std::size_t>(ky) * g.filter_w + kx) * ci * co;
            for (int c = 0; c < ci; ++c) {
              const T v = xi[c];
              const T* wr = wk + static_cast<std::size_t>(c) * co;
              for (int k = 0; k < co; ++k) o[k] += v * wr[k];
            }
          }
      }
  return out;
}

template <typename T>
ConvGrads<T> conv_transpose2d_backward(const Tensor<T>& input, const ConvSpec<T>& spec,
                                       const Tensor<T>& grad_out) {
  spec.validate();
  const auto& g = spec.geom;
  const Nhwc in = nhwc(input);
  const int oh = (in.h - 1) * g.stride + g.filter_h;
  const int ow = (in.w - 1) * g.stride + g.filter_w;
  const int ci = g.in_ch, co = g.out_ch;
  if (grad_out.shape() != Shape{in.n, oh, ow, co})
    throw ShapeError("conv_transpose2d_backward: gradient shape " + to_string(grad_out.shape()));
  ConvGrads<T> grads{Tensor<T>(input.shape()), Tensor<T>(spec.weights.shape()),
                     g.use_bias ? Tensor<T>(Shape{co}) : Tensor<T>()};
  const T* gy = grad_out.data().data();
  if (g.use_bias)
    for (std::size_t i = 0; i < grad_out.size(); ++i) grads.bias[i % co] += gy[i];
  const T* x = input.data().data();
  const T* wt = spec.weights.data().data();
  T* gx = grads.input.data().data();
  T* gw = grads.weights.data().data();
  for (int n = 0; n < in.n; ++n)
    for (int iy = 0; iy < in.h; ++iy)
      for (int ix = 0; ix < in.w; ++ix) {
        const std::size_t in_off = ((static_cast<std::size_t>(n) * in.h + iy) * in.w + ix) * ci;
        for (int ky = 0; ky < g.filter_h; ++ky)
          for (int kx = 0; kx < g.filter_w; ++kx) {
            const int oy = iy * g.stride + ky, ox = ix * g.stride + kx;
            const T* go = gy + ((static_cast<std::size_t>(n) * oh + oy) * ow + ox) * co;
            const std::size_t w_off = (static_cast<std::size_t>(ky) * g.filter_w + kx) * ci * co;
            for (int c = 0; c < ci; ++c) {
              const T v = x[in_off + c];
              const T* wr = wt + w_off + static_cast<std::size_t>(c) * co;
              T* gwr = gw + w_off + static_cast<std::size_t>(c) * co;
              T acc = 0;
              for (int k = 0; k < co; ++k) {
                acc += go[k] * wr[k];
                gwr[k] += v * go[k];
              }
              gx[in_off + c] += acc;
            }
          }
      }
  return grads;
}

}  // namespace smfd
