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

#include <functional>
#include <vector>

#include "smfd/tensor.hpp"

namespace smfd {

// Stacks rank-4 tensors along the channel axis.
template <typename T>
Tensor<T> concat_channels(const std::vector<const Tensor<T>*>& parts) {
  if (parts.empty()) throw InputError("concat: no inputs");
  const Nhwc first = nhwc(*parts.front());
  int total = 0;
  for (const auto* p : parts) {
    const Nhwc d = nhwc(*p);
    if (d.n != first.n || d.h != first.h || d.w != first.w)
      throw ShapeError("concat: spatial mismatch " + to_string(p->shape()) + " vs " +
                       to_string(parts.front()->shape()));
    total += d.c;
  }
  Tensor<T> out({first.n, first.h, first.w, total});
  const std::size_t pixels = static_cast<std::size_t>(first.n) * first.h * first.w;
  int off = 0;
  for (const auto* p : parts) {
    const int c = p->dim(3);
    for (std::size_t q = 0; q < pixels; ++q)
      std::copy_n(p->data().data() + q * c, c, out.data().data() + q * total + off);
    off += c;
  }
  return out;
}

template <typename T>
std::vector<Tensor<T>> split_channels(const Tensor<T>& grad, const std::vector<int>& channels) {
  const Nhwc d = nhwc(grad);
  std::vector<Tensor<T>> out;
  const std::size_t pixels = static_cast<std::size_t>(d.n) * d.h * d.w;
  int off = 0;
  for (int c : channels) {
    Tensor<T> part({d.n, d.h, d.w, c});
    for (std::size_t q = 0; q < pixels; ++q)
      std::copy_n(grad.data().data() + q * d.c + off, c, part.data().data() + q * c);
    out.push_back(std::move(part));
    off += c;
  }
  if (off != d.c) throw ShapeError("split_channels: channel counts do not sum to gradient extent");
  return out;
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "add");
  Tensor<T> out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

namespace detail {
// Index into a gate of shape (N,1,1,C) or (N,H,W,1) for element i of an (N,H,W,C) tensor.
inline std::function<std::size_t(std::size_t)> gate_index(const Shape& x, const Shape& g) {
  const int c = x[3];
  const std::size_t hw = static_cast<std::size_t>(x[1]) * x[2];
  if (g == Shape{x[0], 1, 1, c}) return [=](std::size_t i) { return (i / (hw * c)) * c + i % c; };
  if (g == Shape{x[0], x[1], x[2], 1}) return [=](std::size_t i) { return i / c; };
  if (g == x) return [](std::size_t i) { return i; };
  throw ShapeError("gate: weights " + to_string(g) + " do not broadcast over " + to_string(x));
}
}  // namespace detail

// x * w with w broadcast over spatial (channel gates) or channel (spatial gates) axes.
template <typename T>
Tensor<T> gate(const Tensor<T>& x, const Tensor<T>& w) {
  nhwc(x);
  const auto idx = detail::gate_index(x.shape(), w.shape());
  Tensor<T> out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * w[idx(i)];
  return out;
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> gate_backward(const Tensor<T>& x, const Tensor<T>& w,
                                              const Tensor<T>& grad_out) {
  const auto idx = detail::gate_index(x.shape(), w.shape());
  Tensor<T> gx(x.shape()), gw(w.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t j = idx(i);
    gx[i] = grad_out[i] * w[j];
    gw[j] += grad_out[i] * x[i];
  }
  return {std::move(gx), std::move(gw)};
}

// Contrast/brightness stretch about each image's mean: (x - mu) * c + mu + b.
// For rank-4 input every batch item uses its own mean; lower ranks use one global mean.
template <typename T>
Tensor<T> postprocess_image(const Tensor<T>& img, T contrast = T(2.0), T brightness = T(0.1)) {
  const std::size_t items = img.rank() == 4 ? static_cast<std::size_t>(img.dim(0)) : 1;
  const std::size_t per = img.size() / items;
  Tensor<T> out(img.shape());
  for (std::size_t n = 0; n < items; ++n) {
    T mu = 0;
    for (std::size_t i = 0; i < per; ++i) mu += img[n * per + i];
    mu /= static_cast<T>(per);
    for (std::size_t i = 0; i < per; ++i)
      out[n * per + i] = (img[n * per + i] - mu) * contrast + mu + brightness;
  }
  return out;
}

template <typename T>
Tensor<T> postprocess_image_backward(const Tensor<T>& grad_out, T contrast = T(2.0)) {
  const std::size_t items = grad_out.rank() == 4 ? static_cast<std::size_t>(grad_out.dim(0)) : 1;
  const std::size_t per = grad_out.size() / items;
  Tensor<T> gx(grad_out.shape());
  for (std::size_t n = 0; n < items; ++n) {
    T mean_g = 0;
    for (std::size_t i = 0; i < per; ++i) mean_g += grad_out[n * per + i];
    mean_g /= static_cast<T>(per);
    for (std::size_t i = 0; i < per; ++i)
      gx[n * per + i] = contrast * grad_out[n * per + i] + (1 - contrast) * mean_g;
  }
  return gx;
}

template <typename T>
Tensor<T> clamp(const Tensor<T>& x, T lo, T hi) {
  Tensor<T> out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::clamp(x[i], lo, hi);
  return out;
}

// Gradient passes where the input was inside [lo, hi].
template <typename T>
Tensor<T> clamp_backward(const Tensor<T>& x, const Tensor<T>& grad_out, T lo, T hi) {
  Tensor<T> gx(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) gx[i] = (x[i] >= lo && x[i] <= hi) ? grad_out[i] : T(0);
  return gx;
}

}  // namespace smfd
