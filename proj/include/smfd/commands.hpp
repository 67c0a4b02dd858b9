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
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "smfd/degrade.hpp"
#include "smfd/io/manifest.hpp"
#include "smfd/io/png.hpp"
#include "smfd/maskops.hpp"
#include "smfd/metrics.hpp"
#include "smfd/nets/executor.hpp"
#include "smfd/nets/networks.hpp"
#include "smfd/nets/store.hpp"
#include "smfd/smoke.hpp"

namespace smfd {

// Stable process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitMismatch = 1;  // replay found differing images
inline constexpr int kExitInput = 2;
inline constexpr int kExitModel = 3;

// Runs a command body, mapping exceptions to exit codes with a message on `err`.
inline int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ModelError& e) {
    err << "model error: " << e.what() << '\n';
    return kExitModel;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitModel;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

namespace detail {

namespace fs = std::filesystem;

// *.png directly inside `dir`, sorted by file name.
inline std::vector<fs::path> list_pngs(const std::string& dir) {
  if (!fs::is_directory(dir)) throw InputError("'" + dir + "' is not a directory");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (e.is_regular_file() && ext == ".png") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end(), [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  return out;
}

template <typename T>
Image8 to_image8(const Tensor<T>& img, double scale) {
  require_image(img);
  return {img.dim(0), img.dim(1), img.dim(2), to_bytes(img, scale)};
}

inline Image8 label_image(const LabelMask& m) { return {m.height, m.width, 1, m.labels}; }

inline LabelMask read_labels(const std::string& path, LabelSpace space) {
  const auto img = read_png(path, 1, true);
  return LabelMask(img.height, img.width, img.pixels, space);
}

inline DegradeConfig degrade_config(const std::vector<int>& kernels, int max_layers) {
  DegradeConfig cfg;
  if (!kernels.empty()) cfg.kernel_sizes = kernels;
  cfg.max_layers = max_layers;
  cfg.validate();
  return cfg;
}

inline Image8 degrade_image(const Image8& src, const DegradationPlan& plan) {
  return to_image8(apply_plan(src.tensor<double>(), plan), 1.0);
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace detail

struct DegradeArgs {
  std::string input, output;
  std::uint64_t seed = 0;
  std::string manifest;  // default: <output>/manifest.jsonl
  std::vector<int> kernel_sizes;
  int max_layers = 3;
};

// Image i of the sorted listing is degraded with plan sample_plan(derive_seed(seed, i)),
// so every output depends only on its position in the listing.
inline int cmd_degrade(const DegradeArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = detail::degrade_config(a.kernel_sizes, a.max_layers);
    const auto files = detail::list_pngs(a.input);
    if (files.empty()) throw InputError("no PNG files in '" + a.input + "'");
    std::filesystem::create_directories(a.output);
    std::vector<ManifestRecord> records;
    for (std::size_t i = 0; i < files.size(); ++i) {
      const std::string name = files[i].filename().string();
      try {
        const auto src = read_png(files[i].string(), 3);
        ManifestRecord r{name, name, sample_plan(derive_seed(a.seed, i), cfg)};
        write_png((std::filesystem::path(a.output) / name).string(), detail::degrade_image(src, r.plan));
        records.push_back(std::move(r));
      } catch (const InputError& e) {
        err << "skipping " << name << ": " << e.what() << '\n';
      }
    }
    if (records.empty()) throw InputError("no image in '" + a.input + "' could be degraded");
    const std::string path = a.manifest.empty() ? (std::filesystem::path(a.output) / "manifest.jsonl").string() : a.manifest;
    std::ofstream m(path, std::ios::binary | std::ios::trunc);
    write_manifest(records, m);
    if (!m) throw InputError("cannot write manifest '" + path + "'");
    out << "degraded " << records.size() << " of " << files.size() << " images; manifest " << path << '\n';
    return kExitOk;
  });
}

struct ReplayArgs {
  std::string input;     // folder holding the sources
  std::string manifest;
  std::string against;   // folder holding the degraded images to check
  std::vector<int> kernel_sizes;
  int max_layers = 3;
};

// Re-applies every record to its source and compares pixels with the stored output.
inline int cmd_replay(const ReplayArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = detail::degrade_config(a.kernel_sizes, a.max_layers);
    std::ifstream in(a.manifest);
    if (!in) throw InputError("cannot open manifest '" + a.manifest + "'");
    const auto records = read_manifest(in, cfg);
    int bad = 0;
    for (const auto& r : records) {
      const auto src = read_png((std::filesystem::path(a.input) / r.source).string(), 3);
      const auto stored = read_png((std::filesystem::path(a.against) / r.file).string(), 3);
      const bool same = detail::degrade_image(src, r.plan) == stored;
      bad += !same;
      if (!same) err << "mismatch: " << r.file << '\n';
    }
    out << "replayed " << records.size() << " records, " << bad << " mismatches\n";
    return bad ? kExitMismatch : kExitOk;
  });
}

struct MetricsArgs {
  std::string ref, test;
  int classes = 0;  // > 0: both files are label masks with this many classes
  bool resize = false;
};

inline int cmd_metrics(const MetricsArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    MetricReport r;
    if (a.classes > 0) {
      if (a.classes > 255) throw InputError("--classes must lie in 1..255");
      const auto ref = read_png(a.ref, 1, true);
      auto test = read_png(a.test, 1, true);
      if (ref.height != test.height || ref.width != test.width) {
        if (!a.resize) throw ShapeError("mask extents differ; pass --resize to resample the test mask");
        test.pixels = resize_nearest(test.pixels, test.height, test.width, 1, ref.height, ref.width);
        test.height = ref.height, test.width = ref.width;
      }
      auto onehot = [&](const Image8& m) {
        const LabelSpace space = a.classes <= kMergedLabels ? LabelSpace::merged5 : LabelSpace::raw19;
        LabelMask lm;
        lm.height = m.height, lm.width = m.width, lm.labels = m.pixels, lm.space = space;
        return one_hot<double>(lm, a.classes);
      };
      const auto s = dice_jaccard(onehot(test), onehot(ref));
      r.dice = s.dice, r.dice_loss = s.dice_loss, r.jaccard = s.jaccard;
    } else {
      const auto ref = read_png(a.ref, 3).tensor<double>();
      auto test = read_png(a.test, 3).tensor<double>();
      if (ref.shape() != test.shape()) {
        if (!a.resize) throw ShapeError("image extents differ; pass --resize to resample the test image");
        test = resize_bilinear(test, ref.dim(0), ref.dim(1));
      }
      r = image_report(ref, test, 255.0);
    }
    out << r.to_json().dump() << '\n';
    return kExitOk;
  });
}

struct MaskArgs {
  std::string input, output;
  int size = 0;  // 0 keeps the extent
  std::string table;  // JSON merge table; default grouping when empty
};

// Raw 19-label mask -> merged 5-label mask, optionally nearest-resized.
inline int cmd_mask(const MaskArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto table = a.table.empty() ? MergeTable::defaults() : MergeTable::from_json(detail::read_json_file(a.table));
    auto mask = detail::read_labels(a.input, LabelSpace::raw19);
    if (a.size < 0) throw InputError("--size must be positive");
    if (a.size > 0) mask = resize_mask(mask, a.size, a.size);
    const auto merged = merge_labels(mask, table);
    write_png(a.output, detail::label_image(merged));
    std::array<std::size_t, kMergedLabels> counts{};
    for (auto l : merged.labels) ++counts[l];
    out << "wrote " << a.output << " (" << merged.height << "x" << merged.width << ");";
    for (int c = 0; c < kMergedLabels; ++c) out << ' ' << kMergedLabelNames[c] << '=' << counts[c];
    out << '\n';
    return kExitOk;
  });
}

inline constexpr std::size_t kReferenceParamsMask = 5416159;
inline constexpr std::size_t kReferenceParamsSmfd = 7532601;

struct NetArgs {
  std::string action;  // summary | forward | train-smoke
  NetKind kind = NetKind::smfd_unet;
  std::string config;  // JSON NetConfig; defaults when empty (toy scale for train-smoke)
  std::string weights, image, mask, out;
  std::string labels;  // mask_generator forward: argmax label PNG
  std::string trace, checkpoint;
  std::uint64_t seed = 0;
  int steps = 200, pairs = 8;
};

namespace detail {

inline NetConfig load_config(const NetArgs& a, const NetConfig& fallback) {
  return a.config.empty() ? fallback : NetConfig::from_json(read_json_file(a.config));
}

inline std::string grouped(std::size_t n) {
  std::string s = std::to_string(n);
  for (int i = static_cast<int>(s.size()) - 3; i > 0; i -= 3) s.insert(static_cast<std::size_t>(i), ",");
  return s;
}

inline void net_summary(const NetArgs& a, std::ostream& out) {
  const auto cfg = load_config(a, NetConfig{});
  const auto g = build_network(a.kind, cfg);
  const auto pc = g.param_count();
  const std::size_t ref = a.kind == NetKind::mask_generator ? kReferenceParamsMask : kReferenceParamsSmfd;
  out << g.name << '\n'
      << "total " << grouped(pc.total) << " (reference " << grouped(ref) << ", " << std::showpos << std::fixed
      << std::setprecision(1) << 100.0 * (static_cast<double>(pc.total) / ref - 1.0) << std::noshowpos << "%)\n"
      << "trainable " << grouped(pc.trainable) << "\nnon-trainable " << grouped(pc.non_trainable) << '\n';
  std::vector<std::string> order;
  std::map<std::string, Shape> last;
  for (const auto& n : g.nodes) {
    if (!last.count(n.stage)) order.push_back(n.stage);
    last[n.stage] = n.shape;
  }
  for (const auto& s : order) out << "  " << s << ' ' << to_string(last[s]) << '\n';
}

inline Tensor<float> batch_of(const Tensor<float>& img) {
  Shape s{1};
  s.insert(s.end(), img.shape().begin(), img.shape().end());
  return img.reshaped(s);
}

inline constexpr std::uint8_t kPalette[kMergedLabels][3] = {
    {0, 0, 0}, {230, 180, 140}, {70, 130, 230}, {120, 60, 20}, {200, 80, 160}};

inline void net_forward(const NetArgs& a, std::ostream& out) {
  const auto cfg = load_config(a, NetConfig{});
  if (a.image.empty() || a.out.empty()) throw InputError("forward needs --image and --out");
  const auto g = build_network(a.kind, cfg);
  const auto w = a.weights.empty() ? init_weights<float>(g, a.seed) : load_weights(a.weights);
  check_store(g, w);
  const bool mask_model = a.kind == NetKind::mask_generator;
  const int s = cfg.image_size;
  auto img = read_png(a.image, 3).tensor<float>();
  img = resize_bilinear(img, s, s);
  for (auto& v : img.data()) v = std::clamp(v / 255.0f, 0.0f, 1.0f);
  std::map<std::string, Tensor<float>> in;
  in["image"] = batch_of(mask_model ? to_grayscale(img) : img);
  if (!mask_model && cfg.mask_branch) {
    if (a.mask.empty()) throw InputError("this SMFD config needs --mask (a merged label PNG)");
    const auto m = resize_mask(read_labels(a.mask, LabelSpace::merged5), s, s);
    in["mask"] = batch_of(one_hot<float>(m, cfg.classes));
  }
  const auto y = forward(g, w, in);
  const Tensor<float> item({s, s, y.dim(3)}, y.values());
  if (!mask_model) {
    write_png(a.out, to_image8(item, 255.0));
    out << "wrote " << a.out << '\n';
    return;
  }
  const LabelSpace space = cfg.classes <= kMergedLabels ? LabelSpace::merged5 : LabelSpace::raw19;
  const auto labels = argmax_labels(item, space);
  Image8 preview{s, s, 3, std::vector<std::uint8_t>(static_cast<std::size_t>(s) * s * 3)};
  for (std::size_t p = 0; p < labels.size(); ++p)
    for (int k = 0; k < 3; ++k)
      preview.pixels[p * 3 + k] = labels.labels[p] < kMergedLabels ? kPalette[labels.labels[p]][k] : labels.labels[p] * 13;
  write_png(a.out, preview);
  const std::string label_path =
      a.labels.empty() ? (std::filesystem::path(a.out).replace_extension("").string() + "_labels.png") : a.labels;
  write_png(label_path, label_image(labels));
  out << "wrote " << a.out << " and " << label_path << '\n';
}

inline int net_train_smoke(const NetArgs& a, std::ostream& out, std::ostream& err) {
  const auto cfg = load_config(a, smoke_config());
  const auto data = synthetic_pairs(a.pairs, cfg.image_size, derive_seed(a.seed, 0));
  SmokeOptions opt;
  opt.steps = a.steps;
  opt.seed = a.seed;
  const auto r = train_smoke(a.kind, cfg, data, opt);
  if (!a.trace.empty()) {
    std::ofstream t(a.trace, std::ios::binary | std::ios::trunc);
    write_trace_csv(r.trace, t);
    if (!t) throw InputError("cannot write trace '" + a.trace + "'");
  }
  if (!a.checkpoint.empty()) save_weights(r.best, a.checkpoint);
  out << to_string(a.kind) << " steps " << r.trace.size() << " loss " << r.initial_loss << " -> " << r.final_loss
      << " best " << to_string(r.monitored) << ' ' << r.best_metric << " at step " << r.best_step << '\n';
  if (r.diverged) {
    err << "training diverged: " << r.failure << '\n';
    return kExitModel;
  }
  return kExitOk;
}

}  // namespace detail

inline int cmd_net(const NetArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (a.action == "summary") detail::net_summary(a, out);
    else if (a.action == "forward") detail::net_forward(a, out);
    else if (a.action == "train-smoke") return detail::net_train_smoke(a, out, err);
    else throw InputError("unknown net action '" + a.action + "'");
    return kExitOk;
  });
}

}  // namespace smfd
