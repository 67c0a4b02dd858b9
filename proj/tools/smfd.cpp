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

#include <CLI11.hpp>

#include <iostream>

#include "smfd/commands.hpp"

int main(int argc, char** argv) {
  using namespace smfd;
  CLI::App app{"Semantic-mask face deblurring toolkit"};
  app.require_subcommand(1);

  DegradeArgs deg;
  auto* degrade = app.add_subcommand("degrade", "Blur, resample and add noise to every PNG in a folder");
  degrade->add_option("--input", deg.input, "Folder of sharp PNGs")->required();
  degrade->add_option("--output", deg.output, "Folder for degraded PNGs")->required();
  degrade->add_option("--seed", deg.seed, "Master seed")->required();
  degrade->add_option("--manifest", deg.manifest, "JSONL manifest path (default <output>/manifest.jsonl)");
  degrade->add_option("--kernel-set", deg.kernel_sizes, "Odd kernel sizes")->delimiter(',');
  degrade->add_option("--max-layers", deg.max_layers, "Maximum blur layers")->check(CLI::PositiveNumber);

  ReplayArgs rep;
  auto* replay = app.add_subcommand("replay", "Re-apply a manifest and compare with stored outputs");
  replay->add_option("--input", rep.input, "Folder of sharp PNGs")->required();
  replay->add_option("--manifest", rep.manifest, "JSONL manifest")->required();
  replay->add_option("--against", rep.against, "Folder of degraded PNGs")->required();
  replay->add_option("--kernel-set", rep.kernel_sizes, "Odd kernel sizes")->delimiter(',');
  replay->add_option("--max-layers", rep.max_layers, "Maximum blur layers")->check(CLI::PositiveNumber);

  MetricsArgs met;
  auto* metrics = app.add_subcommand("metrics", "Full-reference metrics as JSON");
  metrics->add_option("--ref", met.ref, "Reference PNG")->required();
  metrics->add_option("--test", met.test, "Test PNG")->required();
  metrics->add_option("--classes", met.classes, "Treat both files as label masks with N classes");
  metrics->add_flag("--resize", met.resize, "Resample the test file to the reference extent");

  MaskArgs msk;
  auto* mask = app.add_subcommand("mask", "Merge a 19-label mask into 5 groups");
  mask->add_option("--input", msk.input, "Raw label PNG")->required();
  mask->add_option("--output", msk.output, "Merged label PNG")->required();
  mask->add_option("--size", msk.size, "Square output extent (nearest)");
  mask->add_option("--table", msk.table, "Merge table JSON");

  NetArgs net;
  std::string kind = "smfd_unet";
  auto* netcmd = app.add_subcommand("net", "Network summary, forward pass or smoke training");
  netcmd->add_option("action", net.action, "summary | forward | train-smoke")
      ->required()
      ->check(CLI::IsMember({"summary", "forward", "train-smoke"}));
  netcmd->add_option("--kind", kind, "mask_generator | smfd_unet");
  netcmd->add_option("--config", net.config, "NetConfig JSON");
  netcmd->add_option("--weights", net.weights, "Weight file");
  netcmd->add_option("--image", net.image, "Input PNG");
  netcmd->add_option("--mask", net.mask, "Merged label PNG (SMFD mask branch)");
  netcmd->add_option("--out", net.out, "Output PNG");
  netcmd->add_option("--labels", net.labels, "Argmax label PNG (mask generator)");
  netcmd->add_option("--trace", net.trace, "Loss trace CSV");
  netcmd->add_option("--checkpoint", net.checkpoint, "Best-weights file");
  netcmd->add_option("--seed", net.seed, "Seed");
  netcmd->add_option("--steps", net.steps, "Training steps")->check(CLI::NonNegativeNumber);
  netcmd->add_option("--pairs", net.pairs, "Synthetic training pairs")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  if (*degrade) return cmd_degrade(deg, std::cout, std::cerr);
  if (*replay) return cmd_replay(rep, std::cout, std::cerr);
  if (*metrics) return cmd_metrics(met, std::cout, std::cerr);
  if (*mask) return cmd_mask(msk, std::cout, std::cerr);
  return guarded(std::cerr, [&] {
    net.kind = parse_net_kind(kind);
    return cmd_net(net, std::cout, std::cerr);
  });
}
