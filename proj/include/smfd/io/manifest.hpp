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

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "smfd/degrade.hpp"

namespace smfd {

// One JSONL line per degraded image. `file` is the output name, `source` the input name,
// both relative to their directories.
struct ManifestRecord {
  std::string file, source;
  DegradationPlan plan;

  bool operator==(const ManifestRecord&) const = default;
};

namespace detail {

template <typename E>
E parse_enum(const std::string& s, std::initializer_list<E> all, const char* what) {
  for (E e : all)
    if (s == to_string(e)) return e;
  throw InputError(std::string("manifest: unknown ") + what + " '" + s + "'");
}

}  // namespace detail

// Keys in a fixed order; doubles in shortest round-trip form, so parse(dump(r)) == r.
inline std::string to_jsonl(const ManifestRecord& r) {
  nlohmann::ordered_json layers = nlohmann::ordered_json::array();
  for (const auto& layer : r.plan.layers) {
    nlohmann::ordered_json ops = nlohmann::ordered_json::array();
    for (const auto& op : layer.ops) {
      nlohmann::ordered_json o;
      o["kind"] = to_string(op.kind);
      o["kernel_size"] = op.kernel_size;
      if (op.direction) o["direction"] = to_string(*op.direction);
      ops.push_back(std::move(o));
    }
    nlohmann::ordered_json l;
    l["sequence"] = to_string(layer.sequence);
    l["ops"] = std::move(ops);
    layers.push_back(std::move(l));
  }
  nlohmann::ordered_json j;
  j["file"] = r.file;
  j["source"] = r.source;
  j["seed"] = r.plan.seed;
  j["layers"] = std::move(layers);
  j["scale"] = r.plan.scale;
  j["noise_sigma"] = r.plan.noise_sigma;
  return j.dump();
}

inline ManifestRecord parse_manifest_line(const std::string& line, const DegradeConfig& cfg = {}) {
  using MD = MotionDirection;
  using BS = BlurSequence;
  ManifestRecord r;
  try {
    const auto j = nlohmann::json::parse(line);
    r.file = j.at("file").get<std::string>();
    r.source = j.at("source").get<std::string>();
    if (!j.at("seed").is_number_unsigned()) throw InputError("manifest: seed must be an unsigned integer");
    r.plan.seed = j.at("seed").get<std::uint64_t>();
    r.plan.scale = j.at("scale").get<double>();
    r.plan.noise_sigma = j.at("noise_sigma").get<double>();
    for (const auto& l : j.at("layers")) {
      BlurLayer layer;
      layer.sequence = detail::parse_enum(l.at("sequence").get<std::string>(), {BS::M, BS::GM, BS::MG, BS::GMG}, "sequence");
      for (const auto& o : l.at("ops")) {
        BlurOp op;
        op.kind = detail::parse_enum(o.at("kind").get<std::string>(), {BlurKind::gaussian, BlurKind::motion}, "kind");
        op.kernel_size = o.at("kernel_size").get<int>();
        if (o.contains("direction"))
          op.direction = detail::parse_enum(o.at("direction").get<std::string>(),
                                            {MD::horizontal, MD::vertical, MD::diagonal, MD::anti_diagonal}, "direction");
        layer.ops.push_back(op);
      }
      r.plan.layers.push_back(std::move(layer));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("manifest: malformed record: ") + e.what());
  }
  if (r.file.empty() || r.file.find('/') != std::string::npos || r.source.empty() ||
      r.source.find('/') != std::string::npos)
    throw InputError("manifest: file and source must be plain file names");
  validate_plan(r.plan, cfg);
  return r;
}

inline void write_manifest(const std::vector<ManifestRecord>& records, std::ostream& os) {
  for (const auto& r : records) os << to_jsonl(r) << '\n';
}

// Blank lines are skipped; errors carry the 1-based line number.
inline std::vector<ManifestRecord> read_manifest(std::istream& is, const DegradeConfig& cfg = {}) {
  std::vector<ManifestRecord> out;
  std::string line;
  for (int n = 1; std::getline(is, line); ++n) {
    if (line.empty()) continue;
    try {
      out.push_back(parse_manifest_line(line, cfg));
    } catch (const InputError& e) {
      throw InputError("line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace smfd
