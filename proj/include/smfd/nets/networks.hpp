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

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "smfd/nets/graph.hpp"

namespace smfd {

enum class UpsampleKind { traditional, attention_transpose, attention_pixelshuffle };
enum class NetKind { mask_generator, smfd_unet };

inline const char* to_string(UpsampleKind u) {
  switch (u) {
    case UpsampleKind::traditional: return "traditional";
    case UpsampleKind::attention_transpose: return "attention_transpose";
    case UpsampleKind::attention_pixelshuffle: return "attention_pixelshuffle";
  }
  return "?";
}

inline const char* to_string(NetKind k) { return k == NetKind::mask_generator ? "mask_generator" : "smfd_unet"; }

inline NetKind parse_net_kind(const std::string& s) {
  if (s == "mask_generator" || s == "mask") return NetKind::mask_generator;
  if (s == "smfd_unet" || s == "smfd") return NetKind::smfd_unet;
  throw InputError("unknown network kind '" + s + "' (expected mask_generator or smfd_unet)");
}

inline UpsampleKind parse_upsample(const std::string& s) {
  for (auto u : {UpsampleKind::traditional, UpsampleKind::attention_transpose, UpsampleKind::attention_pixelshuffle})
    if (s == to_string(u)) return u;
  throw InputError("unknown upsample kind '" + s + "'");
}

struct NetConfig {
  int stages = 4;
  int base_channels = 32;
  int rdc_depth = 3;
  int rdc_growth = 16;  // 0: half the block's output channels
  int classes = 5;
  UpsampleKind upsample = UpsampleKind::attention_pixelshuffle;
  bool postprocess = true;
  bool mask_branch = true;  // smfd_unet only
  bool cbam = true;
  int cbam_reduction = 8;
  int image_size = 256;
  bool bottleneck = false;  // RDC between encoder and decoder
  int up_kernel = 3;       // kernel of the conv inside each upsample block

  int growth_for(int out_ch) const { return rdc_growth > 0 ? rdc_growth : std::max(1, out_ch / 2); }

  void validate() const {
    if (stages < 1 || base_channels < 1 || rdc_depth < 0 || rdc_growth < 0 || classes < 2 || cbam_reduction < 1 ||
        image_size < 1 || up_kernel < 1)
      throw InputError("net config: stages, base_channels, classes, cbam_reduction and image_size must be positive");
    if (image_size % (1 << stages))
      throw ShapeError("net config: image_size " + std::to_string(image_size) + " does not survive " +
                       std::to_string(stages) + " 2x poolings");
    if (cbam && base_channels % cbam_reduction)
      throw InputError("net config: cbam_reduction " + std::to_string(cbam_reduction) + " must divide base_channels " +
                       std::to_string(base_channels));
  }

  nlohmann::json to_json() const {
    return {{"stages", stages},         {"base_channels", base_channels},   {"rdc_depth", rdc_depth},
            {"rdc_growth", rdc_growth}, {"classes", classes},               {"upsample", to_string(upsample)},
            {"postprocess", postprocess}, {"mask_branch", mask_branch},     {"cbam", cbam},
            {"cbam_reduction", cbam_reduction}, {"image_size", image_size},
            {"bottleneck", bottleneck},         {"up_kernel", up_kernel}};
  }

  static NetConfig from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw InputError("net config must be a JSON object");
    NetConfig c;
    for (const auto& [key, v] : j.items()) {
      try {
        if (key == "stages") c.stages = v.get<int>();
        else if (key == "base_channels") c.base_channels = v.get<int>();
        else if (key == "rdc_depth") c.rdc_depth = v.get<int>();
        else if (key == "rdc_growth") c.rdc_growth = v.get<int>();
        else if (key == "classes") c.classes = v.get<int>();
        else if (key == "upsample") c.upsample = parse_upsample(v.get<std::string>());
        else if (key == "postprocess") c.postprocess = v.get<bool>();
        else if (key == "mask_branch") c.mask_branch = v.get<bool>();
        else if (key == "cbam") c.cbam = v.get<bool>();
        else if (key == "cbam_reduction") c.cbam_reduction = v.get<int>();
        else if (key == "image_size") c.image_size = v.get<int>();
        else if (key == "bottleneck") c.bottleneck = v.get<bool>();
        else if (key == "up_kernel") c.up_kernel = v.get<int>();
        else throw InputError("net config: unknown key '" + key + "'");
      } catch (const nlohmann::json::exception&) {
        throw InputError("net config: key '" + key + "' has the wrong type");
      }
    }
    c.validate();
    return c;
  }
};

// The five configurations of the ablation study, in table order.
inline std::vector<std::pair<std::string, NetConfig>> ablation_configs(const NetConfig& base = {}) {
  std::vector<std::pair<std::string, NetConfig>> out;
  NetConfig c = base;
  c.mask_branch = false, c.upsample = UpsampleKind::traditional, c.postprocess = false;
  out.emplace_back("backbone", c);
  c.mask_branch = true;
  out.emplace_back("backbone+mask+traditional", c);
  c.upsample = UpsampleKind::attention_transpose;
  out.emplace_back("backbone+mask+attention_transpose", c);
  c.upsample = UpsampleKind::attention_pixelshuffle;
  out.emplace_back("backbone+mask+attention_pixelshuffle", c);
  c.postprocess = true;
  out.emplace_back("backbone+mask+attention+postprocess", c);
  return out;
}

// Residual dense block: `depth` conv3x3 -> BN -> ReLU units, unit i reading the concatenation
// of the input and every earlier unit; 1x1 fusion plus a residual 1x1 projection; ReLU.
inline int build_rdc(GraphBuilder& b, int x, int depth, int growth, int out_ch, const std::string& name) {
  GraphBuilder::Scope s(b, name);
  std::vector<int> feats{x};
  int running = x;
  for (int i = 0; i < depth; ++i) {
    GraphBuilder::Scope u(b, "unit" + std::to_string(i));
    int y = b.conv(running, growth, 3, "conv");
    y = b.batchnorm(y, "bn");
    y = b.activation(y, Activation::relu, "relu");
    feats.push_back(y);
    running = b.concat(feats, "concat");
  }
  const int fused = b.conv(running, out_ch, 1, "fuse");
  const int proj = b.conv(x, out_ch, 1, "proj");
  return b.activation(b.add(fused, proj, "add"), Activation::relu, "relu");
}

// Channel attention (shared MLP over global avg/max pools) then spatial attention
// (7x7 conv over channelwise avg/max maps), each applied as a sigmoid gate.
inline int build_cbam(GraphBuilder& b, int x, int reduction, const std::string& name) {
  const int c = b.channels(x);
  if (reduction < 1 || reduction > c || c % reduction)
    throw InputError("cbam '" + name + "': reduction " + std::to_string(reduction) + " must divide " +
                     std::to_string(c) + " channels");
  GraphBuilder::Scope s(b, name);
  {
    // both pooled paths run through one MLP whose weights live under <scope>/mlp
    GraphBuilder::Scope m(b, "mlp");
    auto mlp = [&](int v, const std::string& path) {
      const int h = b.conv(v, c / reduction, 1, path + "_fc1", {.param = b.scoped("fc1")});
      return b.conv(b.activation(h, Activation::relu, path + "_relu"), c, 1, path + "_fc2",
                    {.param = b.scoped("fc2")});
    };
    const int avg = mlp(b.global_pool(x, PoolMode::avg, "avg_pool"), "avg");
    const int mx = mlp(b.global_pool(x, PoolMode::max, "max_pool"), "max");
    x = b.gate(x, b.activation(b.add(avg, mx, "add"), Activation::sigmoid, "sigmoid"), "channel_gate");
  }
  const int avg = b.channel_pool(x, PoolMode::avg, "spatial_avg");
  const int mx = b.channel_pool(x, PoolMode::max, "spatial_max");
  const int ws = b.activation(b.conv(b.concat({avg, mx}, "spatial_concat"), 1, 7, "spatial_conv", {.bias = false}),
                              Activation::sigmoid, "spatial_sigmoid");
  return b.gate(x, ws, "spatial_gate");
}

// Upsample x by 2 and join it with the encoder skip. Attention variants pass the skip
// through CBAM first.
inline int build_upsample_block(GraphBuilder& b, UpsampleKind mode, int x, int skip, int out_ch, bool cbam,
                                int reduction, const std::string& name, int kernel = 3) {
  GraphBuilder::Scope s(b, name);
  int up = -1;
  switch (mode) {
    case UpsampleKind::attention_pixelshuffle:
      up = b.activation(b.pixel_shuffle(b.conv(x, out_ch * 4, kernel, "conv"), 2, "shuffle"), Activation::relu, "relu");
      break;
    case UpsampleKind::attention_transpose:
      up = b.activation(b.conv_transpose(x, out_ch, 2, 2, "deconv"), Activation::relu, "relu");
      break;
    case UpsampleKind::traditional:
      up = b.activation(b.conv(b.nearest_up(x, 2, "nearest"), out_ch, kernel, "conv"), Activation::relu, "relu");
      break;
  }
  if (mode != UpsampleKind::traditional && cbam) skip = build_cbam(b, skip, reduction, "skip_cbam");
  return b.concat({up, skip}, "concat");
}

namespace detail {

inline int stage_channels(const NetConfig& c, int s) { return c.base_channels << s; }

struct Encoder {
  std::vector<int> skips;
  int bottom = -1;
};

inline Encoder build_encoder(GraphBuilder& b, const NetConfig& c, int x, const std::string& prefix) {
  Encoder e;
  for (int s = 0; s < c.stages; ++s) {
    GraphBuilder::Scope sc(b, prefix + std::to_string(s));
    const int ch = stage_channels(c, s);
    x = build_rdc(b, x, c.rdc_depth, c.growth_for(ch), ch, "rdc");
    e.skips.push_back(x);
    x = b.max_pool(x, "pool");
  }
  e.bottom = x;
  return e;
}

inline int build_decoder(GraphBuilder& b, const NetConfig& c, int x, const std::vector<int>& skips) {
  for (int s = c.stages - 1; s >= 0; --s) {
    GraphBuilder::Scope sc(b, "dec" + std::to_string(s));
    const int ch = stage_channels(c, s);
    x = build_upsample_block(b, c.upsample, x, skips[s], ch, c.cbam, c.cbam_reduction, "up", c.up_kernel);
    if (s > 0) x = build_rdc(b, x, c.rdc_depth, c.growth_for(ch), ch, "rdc");
  }
  return x;
}

// Final CBAM + RDC at the base width.
inline int build_head_trunk(GraphBuilder& b, const NetConfig& c, int x) {
  if (c.cbam) x = build_cbam(b, x, c.cbam_reduction, "cbam");
  return build_rdc(b, x, c.rdc_depth, c.growth_for(c.base_channels), c.base_channels, "rdc");
}

}  // namespace detail

inline NetworkGraph build_mask_generator(const NetConfig& c) {
  c.validate();
  GraphBuilder b("mask_generator");
  const int img = b.input("image", c.image_size, c.image_size, 1);
  const auto enc = detail::build_encoder(b, c, img, "enc");
  int x = enc.bottom;
  if (c.bottleneck) {
    GraphBuilder::Scope sc(b, "bottleneck");
    const int ch = detail::stage_channels(c, c.stages);
    x = build_rdc(b, x, c.rdc_depth, c.growth_for(ch), ch, "rdc");
  }
  x = detail::build_decoder(b, c, x, enc.skips);
  GraphBuilder::Scope sc(b, "head");
  x = detail::build_head_trunk(b, c, x);
  x = b.activation(b.conv(x, c.classes, 1, "classify"), Activation::softmax, "softmax");
  // Refinement starts at weights C*I: around the uniform distribution softmax(C*p) = p to
  // first order, so it begins as a pass-through yet can still reach confident outputs.
  x = b.activation(b.conv(x, c.classes, 1, "refine", {.identity_gain = static_cast<double>(c.classes)}),
                   Activation::softmax, "refine_softmax");
  return b.finish(x);
}

inline NetworkGraph build_smfd_unet(const NetConfig& c) {
  c.validate();
  GraphBuilder b("smfd_unet");
  const int img = b.input("image", c.image_size, c.image_size, 3);
  const auto enc_img = detail::build_encoder(b, c, img, "img_enc");
  std::vector<int> skips = enc_img.skips;
  int x = enc_img.bottom;
  if (c.mask_branch) {
    const int mask = b.input("mask", c.image_size, c.image_size, c.classes);
    const auto enc_mask = detail::build_encoder(b, c, mask, "mask_enc");
    for (int s = 0; s < c.stages; ++s) {
      GraphBuilder::Scope sc(b, "fuse" + std::to_string(s));
      skips[s] = b.concat({enc_img.skips[s], enc_mask.skips[s]}, "concat");
    }
    GraphBuilder::Scope sc(b, "fuse" + std::to_string(c.stages));
    x = b.concat({enc_img.bottom, enc_mask.bottom}, "concat");
  }
  if (c.bottleneck) {
    GraphBuilder::Scope sc(b, "bottleneck");
    const int ch = detail::stage_channels(c, c.stages);
    x = build_rdc(b, x, c.rdc_depth, c.growth_for(ch), ch, "rdc");
  }
  x = detail::build_decoder(b, c, x, skips);
  GraphBuilder::Scope sc(b, "head");
  x = detail::build_head_trunk(b, c, x);
  x = b.conv(x, 3, 1, "out");
  x = b.conv(x, 3, 1, "refine");
  if (c.postprocess) x = b.postprocess(x, 2.0, 0.1, "postprocess");
  return b.finish(b.clamp(x, 0.0, 1.0, "clamp"));
}

inline NetworkGraph build_network(NetKind kind, const NetConfig& c) {
  return kind == NetKind::mask_generator ? build_mask_generator(c) : build_smfd_unet(c);
}

}  // namespace smfd
