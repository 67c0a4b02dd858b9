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

#include <boost/multiprecision/cpp_int.hpp>
#include <set>
#include <string>
#include <vector>

#include "smfd/degrade.hpp"

namespace smfd {

using BigInt = boost::multiprecision::cpp_int;

// Sizes of the discretized degradation space.
struct CountConfig {
  int kernel_sizes = 6;  // g
  int directions = 4;    // d
  int max_layers = 3;    // L
  int scale_steps = 21;
  int noise_steps = 51;
};

struct PlanCount {
  BigInt per_layer;                // t = gd + g*gd + gd*g + g*gd*g
  std::vector<BigInt> by_layers;   // t^n for n = 1..L
  BigInt blur_total;               // sum of by_layers
  BigInt total;                    // blur_total * scale_steps * noise_steps
};

inline PlanCount count_plans(const CountConfig& c) {
  if (c.kernel_sizes < 1 || c.directions < 1 || c.max_layers < 1 || c.scale_steps < 1 || c.noise_steps < 1)
    throw InputError("count_plans: all config entries must be positive");
  PlanCount r;
  const BigInt g = c.kernel_sizes, d = c.directions;
  const BigInt motion = g * d;
  r.per_layer = motion + g * motion + motion * g + g * motion * g;
  BigInt power = 1;
  for (int n = 1; n <= c.max_layers; ++n) {
    power *= r.per_layer;
    r.by_layers.push_back(power);
    r.blur_total += power;
  }
  r.total = r.blur_total * c.scale_steps * c.noise_steps;
  return r;
}

// Every distinct single blur layer over kernel sizes {1, 3, ..., 2g-1} and d directions.
inline std::vector<BlurLayer> enumerate_layers(int g, int d) {
  std::vector<BlurLayer> out;
  for (BlurSequence seq : {BlurSequence::M, BlurSequence::GM, BlurSequence::MG, BlurSequence::GMG}) {
    const auto kinds = sequence_kinds(seq);
    std::vector<BlurLayer> partial{BlurLayer{seq, {}}};
    for (BlurKind kind : kinds) {
      std::vector<BlurLayer> next;
      for (const auto& p : partial)
        for (int s = 0; s < g; ++s)
          for (int dir = 0; dir < (kind == BlurKind::motion ? d : 1); ++dir) {
            BlurLayer l = p;
            BlurOp op{kind, 2 * s + 1, std::nullopt};
            if (kind == BlurKind::motion) op.direction = static_cast<MotionDirection>(dir);
            l.ops.push_back(op);
            next.push_back(std::move(l));
          }
      partial = std::move(next);
    }
    out.insert(out.end(), partial.begin(), partial.end());
  }
  return out;
}

namespace detail {
inline std::string layer_key(const BlurLayer& l) {
  std::string k = to_string(l.sequence);
  for (const auto& op : l.ops) {
    k += '|';
    k += to_string(op.kind);
    k += std::to_string(op.kernel_size);
    if (op.direction) k += to_string(*op.direction);
  }
  return k;
}
}  // namespace detail

// Exhaustive enumeration of every plan (layer lists x scale step x noise step), counting
// distinct plan keys. Practical only for small configs; refuses more than `limit` plans.
inline BigInt count_plans_brute_force(const CountConfig& c, std::size_t limit = 100000) {
  if (c.directions > 4) throw InputError("brute force supports at most 4 directions");
  const auto layers = enumerate_layers(c.kernel_sizes, c.directions);
  std::set<std::string> seen;
  std::vector<std::string> stack;
  auto visit = [&](auto&& self, int remaining) -> void {
    if (!stack.empty()) {
      std::string base;
      for (const auto& s : stack) base += s + ";";
      for (int si = 0; si < c.scale_steps; ++si)
        for (int ni = 0; ni < c.noise_steps; ++ni) {
          seen.insert(base + "s" + std::to_string(si) + "n" + std::to_string(ni));
          if (seen.size() > limit) throw InputError("brute force limit exceeded");
        }
    }
    if (remaining == 0) return;
    for (const auto& l : layers) {
      stack.push_back(detail::layer_key(l));
      self(self, remaining - 1);
      stack.pop_back();
    }
  };
  visit(visit, c.max_layers);
  return BigInt(seen.size());
}

}  // namespace smfd
