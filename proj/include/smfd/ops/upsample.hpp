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

#include <variant>

#include "smfd/ops/conv.hpp"
#include "smfd/ops/pool.hpp"

namespace smfd {

enum class UpsampleMode { nearest, unpool, transpose, pixel_shuffle };

// Replicates every pixel into a factor x factor block.
template <typename T>
Tensor<T> nearest_upsample(const Tensor<T>& input, int factor) {
  if (factor <= 0) throw InputError("nearest_upsample: factor must be positive");
  const Nhwc in = nhwc(input);
  const int oh = in.h * factor, ow = in.w * factor;
  Tensor<T> out({in.n, oh, ow, in.c});
  for (int n = 0; n < in.n; ++n)
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x)
        for (int c = 0; c < in.c; ++c) out.at(n, y, x, c) = input.at(n, y / factor, x / factor, c);
  return out;
}

template <typename T>
Tensor<T> nearest_upsample_backward(const Shape& input_shape, const Tensor<T>& grad_out, int factor) {
  Tensor<T> gx(input_shape);
  const Nhwc out = nhwc(grad_out, "grad_out");
  for (int n = 0; n < out.n; ++n)
    for (int y = 0; y < out.h; ++y)
      for (int x = 0; x < out.w; ++x)
        for (int c = 0; c < out.c; ++c) gx.at(n, y / factor, x / factor, c) += grad_out.at(n, y, x, c);
  return gx;
}

// Scatters each value to the input position recorded by max pooling; zeros elsewhere.
template <typename T>
Tensor<T> unpool(const Tensor<T>& input, const PoolSwitches& switches) {
  switches.validate();
  if (input.shape() != switches.output_shape)
    throw ShapeError("unpool: input " + to_string(input.shape()) + " does not match switch grid " +
                     to_string(switches.output_shape));
  Tensor<T> out(switches.input_shape);
  for (std::size_t o = 0; o < input.size(); ++o) out[switches.index[o]] += input[o];
  return out;
}

template <typename T>
Tensor<T> unpool_backward(const Tensor<T>& grad_out, const PoolSwitches& switches) {
  Tensor<T> gx(switches.output_shape);
  for (std::size_t o = 0; o < gx.size(); ++o) gx[o] = grad_out[switches.index[o]];
  return gx;
}

// Depth-to-space: out[y, x, c] = in[y / r, x / r, c * r^2 + (y % r) * r + (x % r)].
template <typename T>
Tensor<T> pixel_shuffle(const Tensor<T>& input, int r) {
  if (r <= 0) throw InputError("pixel_shuffle: factor must be positive");
  const Nhwc in = nhwc(input);
  if (in.c % (r * r) != 0)
    throw ShapeError("pixel_shuffle: " + std::to_string(in.c) + " channels not divisible by r^2 = " +
                     std::to_string(r * r));
  const int oc = in.c / (r * r);
  Tensor<T> out({in.n, in.h * r, in.w * r, oc});
  for (int n = 0; n < in.n; ++n)
    for (int y = 0; y < in.h * r; ++y)
      for (int x = 0; x < in.w * r; ++x)
        for (int c = 0; c < oc; ++c)
          out.at(n, y, x, c) = input.at(n, y / r, x / r, c * r * r + (y % r) * r + (x % r));
  return out;
}

// Exact inverse of pixel_shuffle with the same index map.
template <typename T>
Tensor<T> space_to_depth(const Tensor<T>& input, int r) {
  if (r <= 0) throw InputError("space_to_depth: factor must be positive");
  const Nhwc in = nhwc(input);
  if (in.h % r != 0 || in.w % r != 0)
    throw ShapeError("space_to_depth: extents " + to_string(input.shape()) + " not divisible by " +
                     std::to_string(r));
  Tensor<T> out({in.n, in.h / r, in.w / r, in.c * r * r});
  for (int n = 0; n < in.n; ++n)
    for (int y = 0; y < in.h; ++y)
      for (int x = 0; x < in.w; ++x)
        for (int c = 0; c < in.c; ++c)
          out.at(n, y / r, x / r, c * r * r + (y % r) * r + (x % r)) = input.at(n, y, x, c);
  return out;
}

// The shuffle is a permutation, so its adjoint is the inverse permutation.
template <typename T>
Tensor<T> pixel_shuffle_backward(const Tensor<T>& grad_out, int r) {
  return space_to_depth(grad_out, r);
}

template <typename T>
using UpsampleAux = std::variant<std::monostate, PoolSwitches, ConvSpec<T>>;

template <typename T>
Tensor<T> upsample(const Tensor<T>& input, UpsampleMode mode, int factor,
                   const UpsampleAux<T>& aux = std::monostate{}) {
  switch (mode) {
    case UpsampleMode::nearest:
      return nearest_upsample(input, factor);
    case UpsampleMode::pixel_shuffle:
      return pixel_shuffle(input, factor);
    case UpsampleMode::unpool: {
      const auto* sw = std::get_if<PoolSwitches>(&aux);
      if (!sw) throw InputError("upsample(unpool) needs pool switches");
      if (sw->output_shape.size() == 4 && sw->input_shape.size() == 4 &&
          sw->input_shape[1] != sw->output_shape[1] * factor)
        throw ShapeError("upsample(unpool): switch grid does not match factor");
      return unpool(input, *sw);
    }
    case UpsampleMode::transpose: {
      const auto* spec = std::get_if<ConvSpec<T>>(&aux);
      if (!spec) throw InputError("upsample(transpose) needs a conv spec");
      if (spec->geom.stride != factor) throw InputError("upsample(transpose): stride must equal factor");
      return conv_transpose2d(input, *spec);
    }
  }
  throw InputError("upsample: unknown mode");
}

}  // namespace smfd
