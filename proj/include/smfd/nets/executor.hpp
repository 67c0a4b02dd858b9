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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "smfd/nets/graph.hpp"
#include "smfd/nets/store.hpp"
#include "smfd/ops/activation.hpp"
#include "smfd/ops/batchnorm.hpp"
#include "smfd/ops/conv.hpp"
#include "smfd/ops/elementwise.hpp"
#include "smfd/ops/pool.hpp"
#include "smfd/ops/upsample.hpp"
#include "smfd/random.hpp"

namespace smfd {

// Glorot-uniform conv weights unless the node asks for a scaled identity, zero
// biases/betas, unit gammas, running stats (0, 1). He scaling was dropped: its residual
// sums drive CBAM gates into saturation at init.
template <typename T = float>
TensorStore<T> init_weights(const NetworkGraph& g, std::uint64_t seed) {
  TensorStore<T> store;
  std::uint64_t idx = 0;
  for (const auto& p : g.params()) {
    Tensor<T> t(p.shape);
    switch (p.init) {
      case ParamSpec::Init::glorot_uniform: {
        Rng rng(derive_seed(seed, idx));
        const double limit = std::sqrt(6.0 / (p.fan_in + p.fan_out));
        for (auto& v : t.data()) v = static_cast<T>(rng.uniform(-limit, limit));
        break;
      }
      case ParamSpec::Init::scaled_identity:  // {1, 1, c, c}
        for (int i = 0; i < p.shape[2]; ++i) t[static_cast<std::size_t>(i) * p.shape[3] + i] = static_cast<T>(p.gain);
        break;
      case ParamSpec::Init::ones: t.fill(T(1)); break;
      case ParamSpec::Init::zeros: break;
    }
    store.insert(p.name, std::move(t));
    ++idx;
  }
  return store;
}

// Flat recount straight from a weight store: running statistics are the only
// non-trainable tensors.
template <typename T>
ParamCount count_store(const TensorStore<T>& store) {
  ParamCount c;
  for (const auto& [name, t] : store) {
    const bool frozen = name.ends_with("/running_mean") || name.ends_with("/running_var");
    c.total += t.size();
    (frozen ? c.non_trainable : c.trainable) += t.size();
  }
  return c;
}

// Every parameter present with the declared shape; errors name the owning node.
template <typename T>
void check_store(const NetworkGraph& g, const TensorStore<T>& store) {
  for (const auto& p : g.params()) {
    if (!store.contains(p.name)) throw ModelError("weights lack '" + p.name + "' for graph " + g.name);
    if (store.at(p.name).shape() != p.shape)
      throw ModelError("weights '" + p.name + "' have shape " + to_string(store.at(p.name).shape()) + ", node expects " +
                       to_string(p.shape));
  }
}

struct ForwardOptions {
  BnMode bn_mode = BnMode::infer;
  bool force_gates_open = false;  // every gate passes its input through
  bool keep_values = false;       // retain every activation for backward
  bool check_shapes = true;       // compare against declared shapes
};

template <typename T>
struct ForwardState {
  std::vector<Tensor<T>> values;
  std::vector<std::optional<PoolSwitches>> switches;
  std::vector<Tensor<T>> bn_mean, bn_var;
  TensorStore<T> running;  // updated running statistics (train mode only)
  Tensor<T> output;
};

namespace detail {

template <typename T>
ConvSpec<T> conv_spec(const LayerNode& n, const TensorStore<T>& w) {
  ConvSpec<T> s{n.conv, w.at(n.param + "/w"), n.conv.use_bias ? w.at(n.param + "/b") : Tensor<T>()};
  try {
    s.validate();
  } catch (const InputError& e) {
    throw ModelError("node '" + n.id + "': " + e.what());
  }
  return s;
}

inline std::vector<int> last_use(const NetworkGraph& g) {
  std::vector<int> last(g.nodes.size(), -1);
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    for (int in : g.nodes[i].inputs) last[in] = static_cast<int>(i);
  last[g.output] = static_cast<int>(g.nodes.size());
  return last;
}

}  // namespace detail

// Inputs are keyed by input-node name and carry a batch axis: (N, H, W, C).
template <typename T>
ForwardState<T> run_forward(const NetworkGraph& g, const TensorStore<T>& w, const std::map<std::string, Tensor<T>>& inputs,
                            const ForwardOptions& opt = {}) {
  check_store(g, w);
  const std::size_t count = g.nodes.size();
  ForwardState<T> st;
  st.values.resize(count);
  st.switches.resize(count);
  st.bn_mean.resize(count);
  st.bn_var.resize(count);
  const auto last = detail::last_use(g);
  int batch = -1;
  for (std::size_t i = 0; i < count; ++i) {
    const LayerNode& n = g.nodes[i];
    auto in = [&](int k) -> const Tensor<T>& { return st.values[n.inputs[k]]; };
    Tensor<T> y;
    try {
      switch (n.kind) {
        case NodeKind::input: {
          auto it = inputs.find(n.id);
          if (it == inputs.end()) throw InputError("missing network input '" + n.id + "'");
          const Tensor<T>& x = it->second;
          if (x.rank() != 4 || Shape(x.shape().begin() + 1, x.shape().end()) != n.shape)
            throw ShapeError("input '" + n.id + "' has shape " + to_string(x.shape()) + ", expected (N," +
                             to_string(n.shape).substr(1));
          if (batch >= 0 && x.dim(0) != batch) throw ShapeError("network inputs disagree on batch size");
          batch = x.dim(0);
          y = x;
          break;
        }
        case NodeKind::conv: y = conv2d(in(0), detail::conv_spec(n, w)); break;
        case NodeKind::conv_transpose: y = conv_transpose2d(in(0), detail::conv_spec(n, w)); break;
        case NodeKind::batchnorm: {
          auto r = batchnorm(in(0), w.at(n.param + "/gamma"), w.at(n.param + "/beta"), opt.bn_mode, static_cast<T>(n.eps),
                             w.at(n.param + "/running_mean"), w.at(n.param + "/running_var"));
          y = std::move(r.output);
          st.bn_mean[i] = std::move(r.mean);
          st.bn_var[i] = std::move(r.var);
          if (opt.bn_mode == BnMode::train) {
            st.running.set(n.param + "/running_mean", std::move(r.running_mean));
            st.running.set(n.param + "/running_var", std::move(r.running_var));
          }
          break;
        }
        case NodeKind::activation: y = activate(in(0), n.act); break;
        case NodeKind::max_pool: {
          auto r = pool2d(in(0), n.window, n.stride, PoolMode::max);
          y = std::move(r.output);
          st.switches[i] = std::move(r.switches);
          break;
        }
        case NodeKind::global_pool: y = global_pool(in(0), n.pool); break;
        case NodeKind::channel_pool: y = channel_pool(in(0), n.pool); break;
        case NodeKind::nearest_up: y = nearest_upsample(in(0), n.factor); break;
        case NodeKind::pixel_shuffle: y = pixel_shuffle(in(0), n.factor); break;
        case NodeKind::concat: {
          std::vector<const Tensor<T>*> parts;
          for (int k : n.inputs) parts.push_back(&st.values[k]);
          y = concat_channels(parts);
          break;
        }
        case NodeKind::add: y = add(in(0), in(1)); break;
        case NodeKind::gate: y = opt.force_gates_open ? in(0) : gate(in(0), in(1)); break;
        case NodeKind::postprocess:
          y = postprocess_image(in(0), static_cast<T>(n.contrast), static_cast<T>(n.brightness));
          break;
        case NodeKind::clamp: y = clamp(in(0), static_cast<T>(n.lo), static_cast<T>(n.hi)); break;
      }
    } catch (const ModelError&) {
      throw;
    } catch (const InputError& e) {
      if (n.kind == NodeKind::input) throw;
      throw ModelError("node '" + n.id + "' failed: " + e.what());
    }
    if (opt.check_shapes && Shape(y.shape().begin() + 1, y.shape().end()) != n.shape)
      throw ModelError("node '" + n.id + "' produced " + to_string(y.shape()) + ", declared (N," +
                       to_string(n.shape).substr(1));
    st.values[i] = std::move(y);
    if (!opt.keep_values)
      for (int k : n.inputs)
        if (last[k] == static_cast<int>(i)) st.values[k] = Tensor<T>();
  }
  st.output = st.values[g.output];
  return st;
}

template <typename T>
Tensor<T> forward(const NetworkGraph& g, const TensorStore<T>& w, const std::map<std::string, Tensor<T>>& inputs,
                  const ForwardOptions& opt = {}) {
  return run_forward(g, w, inputs, opt).output;
}

// Reverse sweep over a state recorded with keep_values. Returns gradients for every
// trainable parameter (shared parameters accumulate).
template <typename T>
TensorStore<T> backward(const NetworkGraph& g, const TensorStore<T>& w, const ForwardState<T>& st,
                        const Tensor<T>& grad_output, const ForwardOptions& opt = {},
                        std::map<std::string, Tensor<T>>* input_grads = nullptr) {
  const std::size_t count = g.nodes.size();
  if (st.values.size() != count || st.values[g.output].empty())
    throw InputError("backward needs a forward state recorded with keep_values");
  require_same_shape(grad_output, st.values[g.output], "backward");
  std::vector<Tensor<T>> grads(count);
  grads[g.output] = grad_output;
  TensorStore<T> pg;
  for (const auto& p : g.params())
    if (p.trainable) pg.insert(p.name, Tensor<T>(p.shape));
  auto accumulate = [](Tensor<T>& dst, const Tensor<T>& src) {
    if (dst.empty()) {
      dst = src;
      return;
    }
    for (std::size_t k = 0; k < src.size(); ++k) dst[k] += src[k];
  };
  auto accumulate_param = [&](const std::string& name, const Tensor<T>& src) { accumulate(pg.at(name), src); };

  for (std::size_t ii = count; ii-- > 0;) {
    const LayerNode& n = g.nodes[ii];
    if (grads[ii].empty()) continue;
    const Tensor<T>& gy = grads[ii];
    auto x = [&](int k) -> const Tensor<T>& { return st.values[n.inputs[k]]; };
    auto push = [&](int k, const Tensor<T>& gx) { accumulate(grads[n.inputs[k]], gx); };
    switch (n.kind) {
      case NodeKind::input:
        if (input_grads) (*input_grads)[n.id] = gy;
        break;
      case NodeKind::conv:
      case NodeKind::conv_transpose: {
        const auto spec = detail::conv_spec(n, w);
        auto r = n.kind == NodeKind::conv ? conv2d_backward(x(0), spec, gy) : conv_transpose2d_backward(x(0), spec, gy);
        push(0, r.input);
        accumulate_param(n.param + "/w", r.weights);
        if (n.conv.use_bias) accumulate_param(n.param + "/b", r.bias);
        break;
      }
      case NodeKind::batchnorm: {
        auto r = batchnorm_backward(x(0), w.at(n.param + "/gamma"), st.bn_mean[ii], st.bn_var[ii], opt.bn_mode,
                                    static_cast<T>(n.eps), gy);
        push(0, r.input);
        accumulate_param(n.param + "/gamma", r.gamma);
        accumulate_param(n.param + "/beta", r.beta);
        break;
      }
      case NodeKind::activation: push(0, activate_backward(x(0), st.values[ii], gy, n.act)); break;
      case NodeKind::max_pool:
        push(0, pool2d_backward(x(0).shape(), gy, n.window, n.stride, PoolMode::max, &*st.switches[ii]));
        break;
      case NodeKind::global_pool: push(0, global_pool_backward(x(0), gy, n.pool)); break;
      case NodeKind::channel_pool: push(0, channel_pool_backward(x(0), gy, n.pool)); break;
      case NodeKind::nearest_up: push(0, nearest_upsample_backward(x(0).shape(), gy, n.factor)); break;
      case NodeKind::pixel_shuffle: push(0, pixel_shuffle_backward(gy, n.factor)); break;
      case NodeKind::concat: {
        std::vector<int> ch;
        for (int k : n.inputs) ch.push_back(st.values[k].dim(-1));
        auto parts = split_channels(gy, ch);
        for (std::size_t k = 0; k < parts.size(); ++k) push(static_cast<int>(k), parts[k]);
        break;
      }
      case NodeKind::add:
        push(0, gy);
        push(1, gy);
        break;
      case NodeKind::gate:
        if (opt.force_gates_open) {
          push(0, gy);
        } else {
          auto [gx, gw] = gate_backward(x(0), x(1), gy);
          push(0, gx);
          push(1, gw);
        }
        break;
      case NodeKind::postprocess: push(0, postprocess_image_backward(gy, static_cast<T>(n.contrast))); break;
      case NodeKind::clamp: push(0, clamp_backward(x(0), gy, static_cast<T>(n.lo), static_cast<T>(n.hi))); break;
    }
  }
  return pg;
}

}  // namespace smfd
