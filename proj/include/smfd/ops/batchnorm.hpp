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

#include "smfd/tensor.hpp"

namespace smfd {

enum class BnMode { train, infer };

// Per-channel statistics over every axis but the last.
template <typename T>
struct BatchNormResult {
  Tensor<T> output;
  Tensor<T> mean;          // statistics used for normalization
  Tensor<T> var;
  Tensor<T> running_mean;  // updated in train mode, passed through in infer mode
  Tensor<T> running_var;
};

template <typename T>
struct BatchNormGrads {
  Tensor<T> input;
  Tensor<T> gamma;
  Tensor<T> beta;
};

namespace detail {
template <typename T>
void check_bn_args(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps) {
  if (x.empty()) throw ShapeError("batchnorm: zero-element batch");
  const int c = x.dim(-1);
  if (gamma.shape() != Shape{c} || beta.shape() != Shape{c})
    throw ShapeError("batchnorm: gamma/beta must have extent " + std::to_string(c));
  if (!(eps > 0)) throw InputError("batchnorm: eps must be positive");
}
}  // namespace detail

// Train: x_hat = (x - mu_B) / sqrt(var_B + eps); running <- (1 - momentum) * running + momentum * batch.
// Infer: normalizes with the running statistics.
template <typename T>
BatchNormResult<T> batchnorm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                             BnMode mode, T eps, const Tensor<T>& running_mean,
                             const Tensor<T>& running_var, T momentum = T(0.1)) {
  detail::check_bn_args(x, gamma, beta, eps);
  const int c = x.dim(-1);
  const std::size_t m = x.size() / c;
  if (running_mean.shape() != Shape{c} || running_var.shape() != Shape{c})
    throw ShapeError("batchnorm: running statistics must have extent " + std::to_string(c));
  BatchNormResult<T> r{Tensor<T>(x.shape()), Tensor<T>(Shape{c}), Tensor<T>(Shape{c}), running_mean,
                       running_var};
  if (mode == BnMode::train) {
    for (std::size_t i = 0; i < x.size(); ++i) r.mean[i % c] += x[i];
    for (int k = 0; k < c; ++k) r.mean[k] /= static_cast<T>(m);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const T d = x[i] - r.mean[i % c];
      r.var[i % c] += d * d;
    }
    for (int k = 0; k < c; ++k) {
      r.var[k] /= static_cast<T>(m);
      r.running_mean[k] = (1 - momentum) * running_mean[k] + momentum * r.mean[k];
      r.running_var[k] = (1 - momentum) * running_var[k] + momentum * r.var[k];
    }
  } else {
    r.mean = running_mean;
    r.var = running_var;
  }
  std::vector<T> inv(c);
  for (int k = 0; k < c; ++k) inv[k] = T(1) / std::sqrt(r.var[k] + eps);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int k = static_cast<int>(i % c);
    r.output[i] = gamma[k] * (x[i] - r.mean[k]) * inv[k] + beta[k];
  }
  return r;
}

// `mean` and `var` are the statistics the forward pass normalized with.
template <typename T>
BatchNormGrads<T> batchnorm_backward(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& mean,
                                     const Tensor<T>& var, BnMode mode, T eps,
                                     const Tensor<T>& grad_out) {
  require_same_shape(x, grad_out, "batchnorm_backward");
  const int c = x.dim(-1);
  const std::size_t m = x.size() / c;
  BatchNormGrads<T> g{Tensor<T>(x.shape()), Tensor<T>(Shape{c}), Tensor<T>(Shape{c})};
  std::vector<T> inv(c);
  for (int k = 0; k < c; ++k) inv[k] = T(1) / std::sqrt(var[k] + eps);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int k = static_cast<int>(i % c);
    const T xhat = (x[i] - mean[k]) * inv[k];
    g.gamma[k] += grad_out[i] * xhat;
    g.beta[k] += grad_out[i];
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int k = static_cast<int>(i % c);
    if (mode == BnMode::infer) {
      g.input[i] = grad_out[i] * gamma[k] * inv[k];
    } else {
      const T xhat = (x[i] - mean[k]) * inv[k];
      g.input[i] = gamma[k] * inv[k] / static_cast<T>(m) *
                   (static_cast<T>(m) * grad_out[i] - g.beta[k] - xhat * g.gamma[k]);
    }
  }
  return g;
}

}  // namespace smfd
