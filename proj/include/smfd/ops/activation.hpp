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
#include <string>

#include "smfd/tensor.hpp"

namespace smfd {

enum class Activation { linear, relu, sigmoid, tanh, softmax };

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::linear: return "linear";
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::softmax: return "softmax";
  }
  return "?";
}

// Softmax runs along the last (channel) axis; everything else is elementwise.
template <typename T>
Tensor<T> activate(const Tensor<T>& x, Activation kind) {
  Tensor<T> y(x.shape());
  switch (kind) {
    case Activation::linear:
      return x;
    case Activation::relu:
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0 ? x[i] : T(0);
      break;
    case Activation::sigmoid:
      for (std::size_t i = 0; i < x.size(); ++i) {
        // split by sign so exp never overflows
        if (x[i] >= 0) {
          y[i] = T(1) / (T(1) + std::exp(-x[i]));
        } else {
          const T e = std::exp(x[i]);
          y[i] = e / (T(1) + e);
        }
      }
      break;
    case Activation::tanh:
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::tanh(x[i]);
      break;
    case Activation::softmax: {
      const int c = x.dim(-1);
      for (std::size_t base = 0; base < x.size(); base += c) {
        T mx = x[base];
        for (int k = 1; k < c; ++k) mx = std::max(mx, x[base + k]);
        T sum = 0;
        for (int k = 0; k < c; ++k) sum += (y[base + k] = std::exp(x[base + k] - mx));
        for (int k = 0; k < c; ++k) y[base + k] /= sum;
      }
      break;
    }
  }
  return y;
}

// `y` is the forward output; sigmoid, tanh and softmax derivatives are expressed through it.
template <typename T>
Tensor<T> activate_backward(const Tensor<T>& x, const Tensor<T>& y, const Tensor<T>& grad_out,
                            Activation kind) {
  require_same_shape(x, grad_out, "activate_backward");
  Tensor<T> gx(x.shape());
  switch (kind) {
    case Activation::linear:
      return grad_out;
    case Activation::relu:
      for (std::size_t i = 0; i < x.size(); ++i) gx[i] = x[i] > 0 ? grad_out[i] : T(0);
      break;
    case Activation::sigmoid:
      for (std::size_t i = 0; i < x.size(); ++i) gx[i] = grad_out[i] * y[i] * (1 - y[i]);
      break;
    case Activation::tanh:
      for (std::size_t i = 0; i < x.size(); ++i) gx[i] = grad_out[i] * (1 - y[i] * y[i]);
      break;
    case Activation::softmax: {
      const int c = x.dim(-1);
      for (std::size_t base = 0; base < x.size(); base += c) {
        T dot = 0;
        for (int k = 0; k < c; ++k) dot += grad_out[base + k] * y[base + k];
        for (int k = 0; k < c; ++k) gx[base + k] = y[base + k] * (grad_out[base + k] - dot);
      }
      break;
    }
  }
  return gx;
}

}  // namespace smfd
