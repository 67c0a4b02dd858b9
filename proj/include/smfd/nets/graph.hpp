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

#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "smfd/error.hpp"
#include "smfd/ops/activation.hpp"
#include "smfd/ops/conv.hpp"
#include "smfd/ops/pool.hpp"
#include "smfd/tensor.hpp"

namespace smfd {

enum class NodeKind {
  input,
  conv,
  conv_transpose,
  batchnorm,
  activation,
  max_pool,
  global_pool,
  channel_pool,
  nearest_up,
  pixel_shuffle,
  concat,
  add,
  gate,
  postprocess,
  clamp,
};

inline const char* to_string(NodeKind k) {
  static constexpr const char* names[] = {"input",        "conv",       "conv_transpose", "batchnorm",     "activation",
                                          "max_pool",     "global_pool", "channel_pool",  "nearest_up",    "pixel_shuffle",
                                          "concat",       "add",        "gate",           "postprocess",   "clamp"};
  return names[static_cast<int>(k)];
}

// One graph vertex. `param` names the weights (several nodes may share one prefix);
// `shape` is the declared per-item output shape (H, W, C).
struct LayerNode {
  std::string id;
  NodeKind kind = NodeKind::input;
  std::vector<int> inputs;
  std::string param;
  std::string stage;
  Shape shape;

  ConvGeometry conv;  // conv, conv_transpose
  Activation act = Activation::linear;
  PoolMode pool = PoolMode::max;
  int window = 2, stride = 2;  // max_pool
  int factor = 2;              // nearest_up, pixel_shuffle
  double contrast = 2.0, brightness = 0.1;
  double lo = 0.0, hi = 1.0;
  double eps = 1e-3;  // batchnorm
  double identity_gain = 0;  // 1x1 conv: nonzero starts the weights at gain * I
};

struct ParamSpec {
  std::string name;
  Shape shape;
  bool trainable = true;
  enum class Init { glorot_uniform, scaled_identity, zeros, ones } init = Init::zeros;
  int fan_in = 1, fan_out = 1;
  double gain = 1;  // scaled_identity
};

struct ParamCount {
  std::size_t total = 0, trainable = 0, non_trainable = 0;
  bool operator==(const ParamCount&) const = default;
};

struct NetworkGraph {
  std::string name;
  std::vector<LayerNode> nodes;  // topological order
  std::vector<int> inputs;       // indices of input nodes
  int output = -1;

  const LayerNode& node(const std::string& id) const {
    for (const auto& n : nodes)
      if (n.id == id) return n;
    throw InputError("graph " + name + " has no node '" + id + "'");
  }

  // Unique parameters in first-use order.
  std::vector<ParamSpec> params() const {
    std::vector<ParamSpec> out;
    std::map<std::string, bool> seen;
    auto add = [&](ParamSpec p) {
      if (!seen.emplace(p.name, true).second) return;
      out.push_back(std::move(p));
    };
    for (const auto& n : nodes) {
      if (n.kind == NodeKind::conv || n.kind == NodeKind::conv_transpose) {
        const int taps = n.conv.filter_h * n.conv.filter_w;
        if (n.identity_gain != 0)
          add({n.param + "/w", n.conv.weight_shape(), true, ParamSpec::Init::scaled_identity, 1, 1, n.identity_gain});
        else
          add({n.param + "/w", n.conv.weight_shape(), true, ParamSpec::Init::glorot_uniform, taps * n.conv.in_ch,
               taps * n.conv.out_ch});
        if (n.conv.use_bias) add({n.param + "/b", {n.conv.out_ch}, true, ParamSpec::Init::zeros});
      } else if (n.kind == NodeKind::batchnorm) {
        const int c = n.shape[2];
        add({n.param + "/gamma", {c}, true, ParamSpec::Init::ones});
        add({n.param + "/beta", {c}, true, ParamSpec::Init::zeros});
        add({n.param + "/running_mean", {c}, false, ParamSpec::Init::zeros});
        add({n.param + "/running_var", {c}, false, ParamSpec::Init::ones});
      }
    }
    return out;
  }

  ParamCount param_count() const {
    ParamCount c;
    for (const auto& p : params()) {
      const std::size_t n = shape_size(p.shape);
      c.total += n;
      (p.trainable ? c.trainable : c.non_trainable) += n;
    }
    return c;
  }

  void validate() const {
    if (output < 0 || output >= static_cast<int>(nodes.size())) throw ModelError("graph " + name + " has no output");
    std::map<std::string, bool> ids;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (!ids.emplace(nodes[i].id, true).second) throw ModelError("duplicate node id '" + nodes[i].id + "'");
      for (int in : nodes[i].inputs)
        if (in < 0 || in >= static_cast<int>(i)) throw ModelError("node '" + nodes[i].id + "' consumes a later node");
    }
  }
};

// Appends nodes while declaring shapes; scopes build hierarchical ids such as
// "dec1/rdc/unit0/conv".
class GraphBuilder {
 public:
  explicit GraphBuilder(std::string name) { g_.name = std::move(name); }

  class Scope {
   public:
    Scope(GraphBuilder& b, const std::string& s) : b_(b) { b_.scopes_.push_back(s); }
    ~Scope() { b_.scopes_.pop_back(); }
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

   private:
    GraphBuilder& b_;
  };

  // Full id a node named `local` would receive in the current scope.
  std::string scoped(const std::string& local) const {
    std::string id;
    for (const auto& s : scopes_) id += s + "/";
    return id + local;
  }

  const Shape& shape(int x) const { return g_.nodes.at(x).shape; }
  int channels(int x) const { return shape(x)[2]; }

  int input(const std::string& name, int h, int w, int c) {
    if (h <= 0 || w <= 0 || c <= 0) throw InputError("input '" + name + "' needs positive extents");
    LayerNode n;
    n.kind = NodeKind::input;
    n.shape = {h, w, c};
    const int id = push(std::move(n), name, /*scoped=*/false);
    g_.inputs.push_back(id);
    return id;
  }

  struct ConvOpts {
    int stride = 1;
    bool bias = true;
    PadMode pad = PadMode::same;
    std::string param = {};  // shared weight prefix; defaults to the node id
    double identity_gain = 0;  // see LayerNode
  };

  int conv(int x, int out_ch, int k, const std::string& name, ConvOpts o) {
    LayerNode n = unary(NodeKind::conv, x);
    n.conv = ConvGeometry{k, k, channels(x), out_ch, o.stride, o.pad, 0, o.bias};
    n.conv.validate();
    if (o.identity_gain != 0 && (k != 1 || channels(x) != out_ch))
      throw InputError("conv '" + name + "': identity init needs a 1x1 conv with equal channel counts");
    n.identity_gain = o.identity_gain;
    const Padding p = n.conv.resolve(shape(x)[0], shape(x)[1]);
    n.shape = {conv_output_extent(shape(x)[0], k, p.top + p.bottom, o.stride),
               conv_output_extent(shape(x)[1], k, p.left + p.right, o.stride), out_ch};
    check_extent(n.shape, name);
    n.param = o.param;
    return push(std::move(n), name);
  }
  int conv(int x, int out_ch, int k, const std::string& name) { return conv(x, out_ch, k, name, ConvOpts{}); }

  int conv_transpose(int x, int out_ch, int k, int stride, const std::string& name) {
    LayerNode n = unary(NodeKind::conv_transpose, x);
    n.conv = ConvGeometry{k, k, channels(x), out_ch, stride, PadMode::valid, 0, true};
    n.conv.validate();
    n.shape = {(shape(x)[0] - 1) * stride + k, (shape(x)[1] - 1) * stride + k, out_ch};
    return push(std::move(n), name);
  }

  int batchnorm(int x, const std::string& name) { return same_shape(NodeKind::batchnorm, x, name); }

  int activation(int x, Activation a, const std::string& name) {
    LayerNode n = unary(NodeKind::activation, x);
    n.act = a;
    n.shape = shape(x);
    return push(std::move(n), name);
  }

  int max_pool(int x, const std::string& name) {
    LayerNode n = unary(NodeKind::max_pool, x);
    if (shape(x)[0] < 2 || shape(x)[1] < 2)
      throw ShapeError("pool '" + name + "' receives extents " + to_string(shape(x)) + " below the 2x2 window");
    n.shape = {shape(x)[0] / 2, shape(x)[1] / 2, channels(x)};
    return push(std::move(n), name);
  }

  int global_pool(int x, PoolMode m, const std::string& name) {
    LayerNode n = unary(NodeKind::global_pool, x);
    n.pool = m;
    n.shape = {1, 1, channels(x)};
    return push(std::move(n), name);
  }

  int channel_pool(int x, PoolMode m, const std::string& name) {
    LayerNode n = unary(NodeKind::channel_pool, x);
    n.pool = m;
    n.shape = {shape(x)[0], shape(x)[1], 1};
    return push(std::move(n), name);
  }

  int nearest_up(int x, int factor, const std::string& name) {
    LayerNode n = unary(NodeKind::nearest_up, x);
    n.factor = factor;
    n.shape = {shape(x)[0] * factor, shape(x)[1] * factor, channels(x)};
    return push(std::move(n), name);
  }

  int pixel_shuffle(int x, int r, const std::string& name) {
    if (channels(x) % (r * r)) throw ShapeError("pixel shuffle '" + name + "' needs channels divisible by r^2");
    LayerNode n = unary(NodeKind::pixel_shuffle, x);
    n.factor = r;
    n.shape = {shape(x)[0] * r, shape(x)[1] * r, channels(x) / (r * r)};
    return push(std::move(n), name);
  }

  int concat(const std::vector<int>& xs, const std::string& name) {
    LayerNode n;
    n.kind = NodeKind::concat;
    n.inputs = xs;
    n.shape = shape(xs.at(0));
    n.shape[2] = 0;
    for (int x : xs) {
      if (shape(x)[0] != n.shape[0] || shape(x)[1] != n.shape[1])
        throw ShapeError("concat '" + name + "' mixes extents " + to_string(shape(xs[0])) + " and " + to_string(shape(x)));
      n.shape[2] += channels(x);
    }
    return push(std::move(n), name);
  }

  int add(int a, int b, const std::string& name) {
    if (shape(a) != shape(b)) throw ShapeError("add '" + name + "' shapes differ");
    LayerNode n;
    n.kind = NodeKind::add;
    n.inputs = {a, b};
    n.shape = shape(a);
    return push(std::move(n), name);
  }

  int gate(int x, int w, const std::string& name) {
    const Shape &xs = shape(x), &ws = shape(w);
    const bool ok = ws == xs || ws == Shape{1, 1, xs[2]} || ws == Shape{xs[0], xs[1], 1};
    if (!ok) throw ShapeError("gate '" + name + "' cannot broadcast " + to_string(ws) + " over " + to_string(xs));
    LayerNode n;
    n.kind = NodeKind::gate;
    n.inputs = {x, w};
    n.shape = xs;
    return push(std::move(n), name);
  }

  int postprocess(int x, double contrast, double brightness, const std::string& name) {
    LayerNode n = unary(NodeKind::postprocess, x);
    n.contrast = contrast;
    n.brightness = brightness;
    n.shape = shape(x);
    return push(std::move(n), name);
  }

  int clamp(int x, double lo, double hi, const std::string& name) {
    LayerNode n = unary(NodeKind::clamp, x);
    n.lo = lo;
    n.hi = hi;
    n.shape = shape(x);
    return push(std::move(n), name);
  }

  NetworkGraph finish(int output) {
    g_.output = output;
    g_.validate();
    return std::move(g_);
  }

 private:
  LayerNode unary(NodeKind k, int x) {
    LayerNode n;
    n.kind = k;
    n.inputs = {x};
    return n;
  }

  int same_shape(NodeKind k, int x, const std::string& name) {
    LayerNode n = unary(k, x);
    n.shape = shape(x);
    return push(std::move(n), name);
  }

  static void check_extent(const Shape& s, const std::string& name) {
    if (s[0] <= 0 || s[1] <= 0) throw ShapeError("node '" + name + "' has non-positive extent");
  }

  int push(LayerNode n, const std::string& local, bool scoped = true) {
    n.id = scoped ? this->scoped(local) : local;
    if (n.param.empty()) n.param = n.id;
    n.stage = scopes_.empty() ? local : scopes_.front();
    g_.nodes.push_back(std::move(n));
    return static_cast<int>(g_.nodes.size()) - 1;
  }

  NetworkGraph g_;
  std::vector<std::string> scopes_;
};

}  // namespace smfd
