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

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "smfd/error.hpp"
#include "smfd/image.hpp"
#include "smfd/tensor.hpp"

namespace smfd {

enum class LabelSpace { raw19, merged5 };

inline constexpr int kRawLabels = 19;
inline constexpr int kMergedLabels = 5;

inline int label_count(LabelSpace s) { return s == LabelSpace::raw19 ? kRawLabels : kMergedLabels; }

// CelebAMask-HQ label ids.
inline constexpr std::array<std::string_view, kRawLabels> kRawLabelNames{
    "background", "skin", "nose", "eye_g", "l_eye", "r_eye", "l_brow", "r_brow", "l_ear", "r_ear",
    "mouth",      "u_lip", "l_lip", "hair", "hat",  "ear_r", "neck_l", "neck",   "cloth"};

inline constexpr std::array<std::string_view, kMergedLabels> kMergedLabelNames{"background", "components", "wearables",
                                                                               "skin", "hair"};

struct LabelMask {
  int height = 0, width = 0;
  std::vector<std::uint8_t> labels;  // row-major
  LabelSpace space = LabelSpace::raw19;

  LabelMask() = default;
  LabelMask(int h, int w, std::vector<std::uint8_t> v, LabelSpace s) : height(h), width(w), labels(std::move(v)), space(s) {
    validate();
  }
  LabelMask(int h, int w, std::uint8_t fill, LabelSpace s)
      : LabelMask(h, w, std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(h, 0)) * std::max(w, 0), fill), s) {}

  std::uint8_t at(int y, int x) const { return labels[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return labels.size(); }

  void validate() const {
    if (height <= 0 || width <= 0) throw ShapeError("label mask extents must be positive");
    if (labels.size() != static_cast<std::size_t>(height) * width)
      throw ShapeError("label mask holds " + std::to_string(labels.size()) + " labels for " + std::to_string(height) +
                       "x" + std::to_string(width));
    const int n = label_count(space);
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] >= n)
        throw InputError("label " + std::to_string(labels[i]) + " at (y=" + std::to_string(i / width) +
                         ", x=" + std::to_string(i % width) + ") outside " + std::to_string(n) + "-label space");
  }
  bool operator==(const LabelMask&) const = default;
};

// Total map raw label -> merged group, onto {0..4}.
struct MergeTable {
  std::array<std::uint8_t, kRawLabels> map{};

  void validate() const {
    std::array<bool, kMergedLabels> hit{};
    for (int r = 0; r < kRawLabels; ++r) {
      if (map[r] >= kMergedLabels)
        throw InputError("merge table sends raw label " + std::to_string(r) + " to " + std::to_string(map[r]));
      hit[map[r]] = true;
    }
    for (int m = 0; m < kMergedLabels; ++m)
      if (!hit[m]) throw InputError("merge table never produces merged label " + std::to_string(m));
  }

  std::uint8_t operator()(int raw) const { return map.at(raw); }

  // 1 facial components, 2 wearables, 3 skin, 4 hair, 0 everything else.
  static MergeTable defaults() {
    MergeTable t;
    for (int r : {2, 4, 5, 6, 7, 8, 9, 10, 11, 12}) t.map[r] = 1;
    for (int r : {3, 14, 15, 16}) t.map[r] = 2;
    t.map[1] = 3;
    t.map[13] = 4;
    return t;
  }

  // {"<raw>": merged, ...} covering all 19 raw labels.
  static MergeTable from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw InputError("merge table must be a JSON object");
    MergeTable t;
    std::array<bool, kRawLabels> seen{};
    for (const auto& [key, value] : j.items()) {
      int raw = -1;
      try {
        std::size_t used = 0;
        raw = std::stoi(key, &used);
        if (used != key.size()) raw = -1;
      } catch (const std::exception&) {
      }
      if (raw < 0 || raw >= kRawLabels) throw InputError("merge table key '" + key + "' is not a raw label 0..18");
      if (!value.is_number_integer()) throw InputError("merge table value for " + key + " must be an integer");
      const int merged = value.get<int>();
      if (merged < 0 || merged >= kMergedLabels) throw InputError("merge table value for " + key + " outside 0..4");
      t.map[raw] = static_cast<std::uint8_t>(merged);
      seen[raw] = true;
    }
    for (int r = 0; r < kRawLabels; ++r)
      if (!seen[r]) throw InputError("merge table misses raw label " + std::to_string(r));
    t.validate();
    return t;
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (int r = 0; r < kRawLabels; ++r) j[std::to_string(r)] = map[r];
    return j;
  }
};

inline LabelMask merge_labels(const LabelMask& mask, const MergeTable& table) {
  if (mask.space != LabelSpace::raw19) throw InputError("merge_labels expects a raw 19-label mask");
  mask.validate();
  table.validate();
  std::vector<std::uint8_t> out(mask.size());
  std::transform(mask.labels.begin(), mask.labels.end(), out.begin(), [&](std::uint8_t l) { return table.map[l]; });
  return LabelMask(mask.height, mask.width, std::move(out), LabelSpace::merged5);
}

template <typename T = float>
Tensor<T> one_hot(const LabelMask& mask, int classes) {
  if (classes < 1) throw InputError("one_hot needs at least one class");
  Tensor<T> out({mask.height, mask.width, classes});
  for (std::size_t p = 0; p < mask.size(); ++p) {
    if (mask.labels[p] >= classes)
      throw InputError("label " + std::to_string(mask.labels[p]) + " at (y=" + std::to_string(p / mask.width) +
                       ", x=" + std::to_string(p % mask.width) + ") not below " + std::to_string(classes) + " classes");
    out[p * classes + mask.labels[p]] = T(1);
  }
  return out;
}

// Per-pixel argmax over the channel axis (first maximum wins).
template <typename T>
LabelMask argmax_labels(const Tensor<T>& probs, LabelSpace space = LabelSpace::merged5) {
  require_image(probs, "class map");
  const int h = probs.dim(0), w = probs.dim(1), c = probs.dim(2);
  if (c > label_count(space)) throw ShapeError("class map has more channels than the label space");
  std::vector<std::uint8_t> out(static_cast<std::size_t>(h) * w);
  for (std::size_t p = 0; p < out.size(); ++p) {
    const T* px = probs.data().data() + p * c;
    out[p] = static_cast<std::uint8_t>(std::max_element(px, px + c) - px);
  }
  return LabelMask(h, w, std::move(out), space);
}

inline LabelMask resize_mask(const LabelMask& mask, int out_h, int out_w) {
  return LabelMask(out_h, out_w, resize_nearest(mask.labels, mask.height, mask.width, 1, out_h, out_w), mask.space);
}

struct TrainingPair {
  Tensor<float> sharp;        // S x S x 3 in [0,1]
  Tensor<float> blurry;       // S x S x 3 in [0,1]
  Tensor<float> blurry_gray;  // S x S x 1 in [0,1]
  LabelMask mask;             // merged
  Tensor<float> mask_onehot;  // S x S x 5
};

// Images arrive in [0,255]; they are bilinear-resized, the mask nearest-resized and merged.
inline TrainingPair prepare_pair(const Tensor<float>& sharp, const Tensor<float>& blurry, const LabelMask& mask,
                                 const MergeTable& table, int size = 256) {
  require_image(sharp, "sharp image");
  require_image(blurry, "blurry image");
  if (sharp.dim(2) != 3 || blurry.dim(2) != 3) throw ShapeError("prepare_pair expects RGB images");
  if (sharp.dim(0) != blurry.dim(0) || sharp.dim(1) != blurry.dim(1) || mask.height != sharp.dim(0) ||
      mask.width != sharp.dim(1))
    throw ShapeError("prepare_pair extents differ: sharp " + to_string(sharp.shape()) + ", blurry " +
                     to_string(blurry.shape()) + ", mask " + std::to_string(mask.height) + "x" + std::to_string(mask.width));
  if (size < 1) throw InputError("prepare_pair size must be positive");
  auto normalize = [size](const Tensor<float>& img) {
    auto out = resize_bilinear(img, size, size);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(out[i] / 255.0f, 0.0f, 1.0f);
    return out;
  };
  TrainingPair p;
  p.sharp = normalize(sharp);
  p.blurry = normalize(blurry);
  p.blurry_gray = to_grayscale(p.blurry);
  p.mask = merge_labels(resize_mask(mask, size, size), table);
  p.mask_onehot = one_hot<float>(p.mask, kMergedLabels);
  return p;
}

}  // namespace smfd
