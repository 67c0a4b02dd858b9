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

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "grad_cases.hpp"
#include "smfd/augment.hpp"
#include "smfd/gradcheck.hpp"
#include "smfd/smoke.hpp"
#include "smfd/train.hpp"

using namespace smfd;
using smfd::testing::random_tensor;

namespace {

TensorStore<double> scalar_store(double v) {
  TensorStore<double> s;
  s.insert("theta", Tensor<double>({1}, {v}));
  return s;
}

TrainingPair gray_pair(int size, float value) {
  TrainingPair p;
  p.sharp = Tensor<float>({size, size, 3}, value);
  p.blurry = p.sharp;
  p.blurry_gray = to_grayscale(p.blurry);
  p.mask = LabelMask(size, size, std::uint8_t{1}, LabelSpace::merged5);
  p.mask_onehot = one_hot<float>(p.mask, kMergedLabels);
  return p;
}

TrainingPair random_pair(int size, std::uint64_t seed, bool with_background = true) {
  Rng rng(seed);
  TrainingPair p;
  p.sharp = random_tensor(rng, {size, size, 3}, 0.0, 1.0).cast<float>();
  p.blurry = random_tensor(rng, {size, size, 3}, 0.0, 1.0).cast<float>();
  p.blurry_gray = to_grayscale(p.blurry);
  std::vector<std::uint8_t> labels(static_cast<std::size_t>(size) * size);
  for (auto& l : labels) l = static_cast<std::uint8_t>((with_background ? 0 : 1) + rng.below(with_background ? 5 : 3));
  p.mask = LabelMask(size, size, std::move(labels), LabelSpace::merged5);
  p.mask_onehot = one_hot<float>(p.mask, kMergedLabels);
  return p;
}

std::set<int> label_set(const LabelMask& m) { return {m.labels.begin(), m.labels.end()}; }

void expect_same_pair(const TrainingPair& a, const TrainingPair& b) {
  EXPECT_EQ(a.sharp, b.sharp);
  EXPECT_EQ(a.blurry, b.blurry);
  EXPECT_EQ(a.blurry_gray, b.blurry_gray);
  EXPECT_EQ(a.mask, b.mask);
  EXPECT_EQ(a.mask_onehot, b.mask_onehot);
}

}  // namespace

TEST(Adam, FirstStepMovesByLearningRateTowardsMinusSign) {
  for (double g : {0.7, -3.0, 1e-3}) {
    AdamState<double> s;
    auto p = scalar_store(0.25);
    TensorStore<double> grad = scalar_store(g);
    adam_step(s, p, grad);
    const double expected = 0.25 - 1e-3 * g / (std::abs(g) + 1e-8);
    EXPECT_NEAR(p.at("theta")[0], expected, 1e-15);
    EXPECT_NEAR(p.at("theta")[0], 0.25 - 1e-3 * (g > 0 ? 1 : -1), 1e-8);
    EXPECT_EQ(s.t, 1u);
  }
}

TEST(Adam, ZeroGradientsFromZeroMomentsAreIdentity) {
  Rng rng(3);
  for (std::uint64_t t : {0u, 1u, 17u, 5000u}) {
    AdamState<float> s;
    s.t = t;
    s.lr = rng.uniform(1e-4, 1.0);
    TensorStore<float> p, g;
    p.insert("a", random_tensor(rng, {3, 4}).cast<float>());
    p.insert("b", random_tensor(rng, {5}).cast<float>());
    g.insert("a", Tensor<float>({3, 4}));
    g.insert("b", Tensor<float>({5}));
    const auto before = p;
    for (int i = 0; i < 50; ++i) adam_step(s, p, g);
    EXPECT_EQ(p, before);
    EXPECT_EQ(s.t, t + 50);
  }
}

TEST(Adam, QuadraticRunMatchesReferenceTrajectory) {
  AdamState<double> s;
  s.lr = 0.1;
  auto p = scalar_store(1.0);
  for (int i = 0; i < 200; ++i) adam_step(s, p, scalar_store(2 * p.at("theta")[0]));
  // independent scalar implementation of the same update equations
  EXPECT_NEAR(p.at("theta")[0], -7.2179864777083035e-06, 1e-12);
  EXPECT_LT(std::abs(p.at("theta")[0]), 0.05);
}

TEST(Adam, MomentsMirrorParametersAndSkipUngradedTensors) {
  AdamState<float> s;
  TensorStore<float> p, g;
  p.insert("w", Tensor<float>({2, 3}, 1.0f));
  p.insert("bn/running_mean", Tensor<float>({3}, 0.5f));
  g.insert("w", Tensor<float>({2, 3}, 0.1f));
  adam_step(s, p, g);
  EXPECT_EQ(s.m.at("w").shape(), (Shape{2, 3}));
  EXPECT_EQ(s.v.at("w").shape(), (Shape{2, 3}));
  EXPECT_FALSE(s.m.contains("bn/running_mean"));
  EXPECT_EQ(p.at("bn/running_mean"), Tensor<float>({3}, 0.5f));
}

TEST(Adam, RejectsNonFiniteGradientNamingParameterWithoutSideEffects) {
  AdamState<float> s;
  TensorStore<float> p, g;
  p.insert("ok", Tensor<float>({2}, 1.0f));
  p.insert("enc0/conv/w", Tensor<float>({2}, 1.0f));
  g.insert("ok", Tensor<float>({2}, 1.0f));
  g.insert("enc0/conv/w", Tensor<float>({2}, {0.0f, std::numeric_limits<float>::quiet_NaN()}));
  const auto before = p;
  try {
    adam_step(s, p, g);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("enc0/conv/w"), std::string::npos);
  }
  EXPECT_EQ(p, before);
  EXPECT_EQ(s.t, 0u);
  g.at("enc0/conv/w")[1] = std::numeric_limits<float>::infinity();
  EXPECT_THROW(adam_step(s, p, g), NumericError);
}

TEST(Adam, RejectsMisalignedGradients) {
  AdamState<float> s;
  TensorStore<float> p, g;
  p.insert("w", Tensor<float>({2}));
  g.insert("w", Tensor<float>({3}));
  EXPECT_THROW(adam_step(s, p, g), ShapeError);
  TensorStore<float> h;
  h.insert("missing", Tensor<float>({2}));
  EXPECT_THROW(adam_step(s, p, h), InputError);
}

TEST(Plateau, MonotoneImprovementKeepsRate) {
  PlateauState s;
  for (double m : {0.5, 0.6, 0.7}) s = plateau_step(s, m);
  EXPECT_EQ(s.lr, 1e-3);
  EXPECT_EQ(s.stall, 0);
  EXPECT_EQ(s.best, 0.7);
}

TEST(Plateau, FiveFlatEpochsCutRateToTwentyPercent) {
  PlateauState s;
  s = plateau_step(s, 0.8);
  for (int i = 0; i < 4; ++i) {
    s = plateau_step(s, 0.8);
    EXPECT_EQ(s.lr, 1e-3) << i;
    EXPECT_EQ(s.stall, i + 1);
  }
  s = plateau_step(s, 0.8);
  EXPECT_DOUBLE_EQ(s.lr, 2e-4);
  EXPECT_EQ(s.stall, 0);
}

TEST(Plateau, ImprovementNeedsMargin) {
  PlateauState s;
  s = plateau_step(s, 0.5);
  s = plateau_step(s, 0.5 + 5e-9);
  EXPECT_EQ(s.stall, 1);
  s = plateau_step(s, 0.5 + 2e-8);
  EXPECT_EQ(s.stall, 0);
  s = plateau_step(s, std::nan(""));
  EXPECT_EQ(s.stall, 1);
}

TEST(Plateau, RateNonIncreasingAndFloored) {
  Rng rng(11);
  for (int seq = 0; seq < 2000; ++seq) {
    PlateauState s;
    for (int e = 0; e < 200; ++e) {
      const double before = s.lr;
      s = plateau_step(s, rng.uniform() < 0.9 ? 0.1 : rng.uniform());
      ASSERT_LE(s.lr, before);
      ASSERT_GE(s.lr, 1e-9);
      ASSERT_GE(s.stall, 0);
      ASSERT_LE(s.stall, s.patience);
    }
  }
  PlateauState s;
  for (int e = 0; e < 1000; ++e) s = plateau_step(s, 0.0);
  EXPECT_EQ(s.lr, 1e-9);
}

TEST(EarlyStop, ImprovingSequenceNeverStops) {
  EarlyStopState s;
  for (int e = 0; e < 100; ++e) s = early_stop_step(s, e * 0.01);
  EXPECT_FALSE(s.stopped);
}

TEST(EarlyStop, StopsExactlyAtTenFlatEpochs) {
  EarlyStopState s;
  s = early_stop_step(s, 0.6);
  for (int i = 0; i < 9; ++i) s = early_stop_step(s, 0.6);
  EXPECT_FALSE(s.stopped);
  EXPECT_EQ(s.stall, 9);
  s = early_stop_step(s, 0.59);
  EXPECT_TRUE(s.stopped);
  const auto again = early_stop_step(s, 0.99);
  EXPECT_TRUE(again.stopped);
}

TEST(EarlyStop, ImprovementDuringStallResetsCounter) {
  EarlyStopState s;
  s = early_stop_step(s, 0.6);
  for (int i = 0; i < 8; ++i) s = early_stop_step(s, 0.5);
  s = early_stop_step(s, 0.61);
  EXPECT_EQ(s.stall, 0);
  for (int i = 0; i < 9; ++i) s = early_stop_step(s, 0.5);
  EXPECT_FALSE(s.stopped);
}

TEST(KFold, HundredItemsSplitTwentyAndSixteens) {
  const auto plan = kfold_split(100, 4);
  EXPECT_EQ(plan.test.size(), 20u);
  for (const auto& f : plan.folds) EXPECT_EQ(f.size(), 16u);
  EXPECT_EQ(plan.train_for(2).size(), 64u);
}

TEST(KFold, AlwaysAPartition) {
  for (int n = 10; n <= 257; n += 7)
    for (std::uint64_t seed : {0u, 1u, 99u}) {
      const auto plan = kfold_split(n, seed);
      std::vector<int> all = plan.test;
      std::size_t lo = SIZE_MAX, hi = 0;
      for (const auto& f : plan.folds) {
        all.insert(all.end(), f.begin(), f.end());
        lo = std::min(lo, f.size());
        hi = std::max(hi, f.size());
      }
      std::sort(all.begin(), all.end());
      std::vector<int> expected(n);
      std::iota(expected.begin(), expected.end(), 0);
      ASSERT_EQ(all, expected) << n;
      ASSERT_LE(hi - lo, 1u) << n;
      ASSERT_EQ(plan.test.size(), static_cast<std::size_t>(std::lround(n * 0.2 + 1e-9))) << n;
    }
}

TEST(KFold, DeterministicPerSeedAndRejectsTinySets) {
  EXPECT_EQ(kfold_split(50, 3).test, kfold_split(50, 3).test);
  EXPECT_EQ(kfold_split(50, 3).folds, kfold_split(50, 3).folds);
  EXPECT_NE(kfold_split(50, 3).test, kfold_split(50, 4).test);
  EXPECT_THROW(kfold_split(9, 0), InputError);
  const auto plan = kfold_split(30, 0);
  for (int k = 0; k < kFolds; ++k) {
    const auto train = plan.train_for(k);
    for (int i : plan.folds[k]) EXPECT_FALSE(std::binary_search(train.begin(), train.end(), i));
  }
  EXPECT_THROW(plan.train_for(5), InputError);
}

TEST(Losses, ValuesAgreeWithMetrics) {
  Rng rng(5);
  const auto a = random_tensor(rng, {2, 4, 4, 3}, 0.0, 1.0), b = random_tensor(rng, {2, 4, 4, 3}, 0.0, 1.0);
  EXPECT_NEAR(mse_loss(a, b).value, mse(a, b), 1e-15);
  EXPECT_NEAR(dice_loss(a, b).value, dice_jaccard(a, b).dice_loss, 1e-15);
  EXPECT_NEAR(dice_loss(b, b).value, 1 - dice_jaccard(b, b).dice, 1e-15);
}

TEST(Losses, GradientsMatchFiniteDifferences) {
  Rng rng(8);
  const auto target = random_tensor(rng, {2, 3, 3, 4}, 0.0, 1.0);
  for (bool dice : {false, true}) {
    auto fwd = [&](const TensorList& x) {
      return Tensor<double>({1}, {dice ? dice_loss(x[0], target).value : mse_loss(x[0], target).value});
    };
    auto adj = [&](const TensorList& x, const Tensor<double>& gy) {
      auto g = dice ? dice_loss(x[0], target).grad : mse_loss(x[0], target).grad;
      for (auto& v : g.data()) v *= gy[0];
      return TensorList{g};
    };
    const auto r = grad_check(fwd, adj, {random_tensor(rng, {2, 3, 3, 4}, 0.0, 1.0)}, 1e-6, 2);
    EXPECT_TRUE(r.passed) << (dice ? "dice " : "mse ") << r.worst;
  }
}

TEST(Losses, EmptyDiceChannelScoresOneWithoutGradient) {
  Tensor<double> p({1, 1, 2, 2}, {0.5, 0.0, 0.5, 0.0}), t({1, 1, 2, 2}, {1.0, 0.0, 0.0, 0.0});
  const auto r = dice_loss(p, t);
  // channel 0: 2*0.5/(1+1) = 0.5; channel 1 empty: 1
  EXPECT_NEAR(r.value, 0.25, 1e-15);
  EXPECT_EQ(r.grad[1], 0.0);
  EXPECT_EQ(r.grad[3], 0.0);
}

TEST(Augment, IdentityDrawLeavesPairUnchanged) {
  const auto p = random_pair(12, 1);
  expect_same_pair(apply_augment(p, AugmentDraw{}), p);
}

TEST(Augment, FlipTwiceRestoresPair) {
  const auto p = random_pair(9, 2);
  AugmentDraw d;
  d.flip = true;
  const auto once = apply_augment(p, d);
  EXPECT_NE(once.sharp, p.sharp);
  EXPECT_EQ(once.mask.at(3, 0), p.mask.at(3, 8));
  expect_same_pair(apply_augment(once, d), p);
}

TEST(Augment, BrightnessScalesGrayImage) {
  AugmentDraw d;
  d.brightness = 1.3;
  const auto out = apply_augment(gray_pair(6, 0.5f), d);
  for (float v : out.sharp.data()) EXPECT_FLOAT_EQ(v, 0.65f);
  for (float v : out.blurry.data()) EXPECT_FLOAT_EQ(v, 0.65f);
  for (float v : out.blurry_gray.data()) EXPECT_NEAR(v, 0.65f, 1e-6);
  const auto sat = apply_augment(gray_pair(6, 0.9f), d);
  for (float v : sat.sharp.data()) EXPECT_EQ(v, 1.0f);
}

TEST(Augment, ContrastPivotsOnBlurryMean) {
  auto p = gray_pair(2, 0.4f);
  for (int i = 6; i < 12; ++i) p.blurry[i] = p.sharp[i] = 0.6f;
  p.blurry_gray = to_grayscale(p.blurry);
  AugmentDraw d;
  d.contrast = 1.3;
  const auto out = apply_augment(p, d);
  EXPECT_NEAR(out.sharp[0], 0.37f, 1e-6);
  EXPECT_NEAR(out.sharp[11], 0.63f, 1e-6);
  EXPECT_EQ(out.mask, p.mask);
}

TEST(Augment, QuarterTurnMovesPixelsExactly) {
  const auto p = random_pair(8, 3);
  AugmentDraw d;
  d.angle_deg = 90;
  const auto out = apply_augment(p, d);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      EXPECT_EQ(out.mask.at(y, x), p.mask.at(7 - x, y));
      for (int k = 0; k < 3; ++k)
        EXPECT_NEAR(out.sharp[(y * 8 + x) * 3 + k], p.sharp[((7 - x) * 8 + y) * 3 + k], 1e-5);
    }
}

TEST(Augment, RotationFillsOutsideWithZero) {
  auto p = gray_pair(16, 0.8f);
  AugmentDraw d;
  d.angle_deg = 30;
  const auto out = apply_augment(p, d);
  EXPECT_EQ(out.sharp[0], 0.0f);
  EXPECT_EQ(out.mask.at(0, 0), 0);
  EXPECT_EQ(out.mask.at(8, 8), 1);
  EXPECT_NEAR(out.sharp[(8 * 16 + 8) * 3], 0.8f, 1e-6);
}

TEST(Augment, GeometryIsSharedAndLabelsStayWithinInput) {
  const AugmentSpec spec;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const bool background = seed % 2 == 0;
    auto p = random_pair(20, seed, background);
    p.blurry = p.sharp;
    p.blurry_gray = to_grayscale(p.blurry);
    auto d = sample_augment(spec, seed);
    d.brightness = d.contrast = 1.0;
    const auto out = apply_augment(p, d);
    EXPECT_EQ(out.sharp, out.blurry);
    auto allowed = label_set(p.mask);
    if (d.angle_deg != 0) allowed.insert(0);  // rotation fills the corners with background
    for (int l : label_set(out.mask)) EXPECT_TRUE(allowed.count(l)) << "seed " << seed << " label " << l;
    EXPECT_EQ(out.mask_onehot, one_hot<float>(out.mask, kMergedLabels));
    EXPECT_EQ(out.blurry_gray, to_grayscale(out.blurry));

    auto flat = d;
    flat.angle_deg = 0;
    const auto no_rotation = apply_augment(p, flat);
    for (int l : label_set(no_rotation.mask)) EXPECT_TRUE(label_set(p.mask).count(l)) << "seed " << seed;
  }
}

TEST(Augment, SampledDrawsStayInRangeAndOutputsClamped) {
  const AugmentSpec spec;
  int flips = 0;
  for (std::uint64_t s = 0; s < 2000; ++s) {
    const auto d = sample_augment(spec, s);
    ASSERT_EQ(d, sample_augment(spec, s));
    ASSERT_LE(std::abs(d.angle_deg), 30.0);
    ASSERT_TRUE(d.crop_scale >= 0.8 && d.crop_scale <= 1.0);
    ASSERT_TRUE(d.brightness >= 0.7 && d.brightness <= 1.3);
    ASSERT_TRUE(d.contrast >= 0.7 && d.contrast <= 1.3);
    flips += d.flip;
  }
  EXPECT_NEAR(flips, 1000, 3 * std::sqrt(500.0));
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto out = augment(random_pair(16, s), spec, s);
    for (float v : out.sharp.data()) ASSERT_TRUE(v >= 0.0f && v <= 1.0f);
    for (float v : out.blurry.data()) ASSERT_TRUE(v >= 0.0f && v <= 1.0f);
  }
}

TEST(Augment, SpecRejectsWiderRanges) {
  AugmentSpec s;
  s.max_rotation_deg = 45;
  EXPECT_THROW(s.validate(), InputError);
  s = {};
  s.crop_min = 0.5;
  EXPECT_THROW(s.validate(), InputError);
  s = {};
  s.brightness_max = 1.5;
  EXPECT_THROW(sample_augment(s, 0), InputError);
  s = {};
  s.contrast_min = 0.9;
  s.contrast_max = 0.8;
  EXPECT_THROW(s.validate(), InputError);
}

TEST(Synthetic, DeterministicShapesAndEveryClassPresent) {
  const auto a = synthetic_pairs(4, 32, 5), b = synthetic_pairs(4, 32, 5);
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    expect_same_pair(a[i], b[i]);
    EXPECT_EQ(a[i].sharp.shape(), (Shape{32, 32, 3}));
    EXPECT_EQ(a[i].blurry_gray.shape(), (Shape{32, 32, 1}));
    EXPECT_EQ(label_set(a[i].mask), (std::set<int>{0, 1, 2, 3, 4}));
    EXPECT_NE(a[i].sharp, a[i].blurry);
  }
  EXPECT_NE(synthetic_pairs(1, 32, 6)[0].sharp, a[0].sharp);
}

TEST(Smoke, ZeroStepsLeaveWeightsUnchanged) {
  const auto data = synthetic_pairs(2, 32, 1);
  SmokeOptions o;
  o.steps = 0;
  o.seed = 3;
  const auto r = train_smoke(NetKind::smfd_unet, smoke_config(), data, o);
  const auto g = build_smfd_unet(smoke_config());
  EXPECT_EQ(r.weights, init_weights<float>(g, derive_seed(3, 1)));
  EXPECT_EQ(r.best, r.weights);
  EXPECT_TRUE(r.trace.empty());
  EXPECT_EQ(r.initial_loss, r.final_loss);
}

TEST(Smoke, IdenticalSeedsGiveIdenticalTraces) {
  const auto data = synthetic_pairs(3, 32, 2);
  SmokeOptions o;
  o.steps = 4;
  o.eval_every = 2;
  o.seed = 7;
  for (auto kind : {NetKind::smfd_unet, NetKind::mask_generator}) {
    const auto a = train_smoke(kind, smoke_config(), data, o);
    const auto b = train_smoke(kind, smoke_config(), data, o);
    std::ostringstream ca, cb;
    write_trace_csv(a.trace, ca);
    write_trace_csv(b.trace, cb);
    EXPECT_EQ(ca.str(), cb.str());
    EXPECT_EQ(a.weights, b.weights);
    EXPECT_EQ(a.trace.size(), 4u);
    EXPECT_NE(a.weights, train_smoke(kind, smoke_config(), data, SmokeOptions{4, 2, 5e-3, 8}).weights);
  }
}

TEST(Smoke, BestCheckpointHoldsTheBestEpochMetric) {
  const auto data = synthetic_pairs(4, 32, 3);
  SmokeOptions o;
  o.steps = 12;
  o.eval_every = 3;
  o.seed = 1;
  const auto cfg = smoke_config();
  const auto r = train_smoke(NetKind::mask_generator, cfg, data, o);
  double best = -1;
  int epochs = 0;
  for (const auto& row : r.trace)
    if (row.metric) {
      ++epochs;
      best = std::max(best, *row.metric);
    }
  EXPECT_EQ(epochs, 4);
  EXPECT_EQ(r.best_metric, best);
  EXPECT_EQ(*r.trace[r.best_step - 1].metric, best);

  const auto g = build_mask_generator(cfg);
  const auto y = forward(g, r.best, {{"image", detail::stack(data, &TrainingPair::blurry_gray)}});
  EXPECT_NEAR(dice_jaccard(y, detail::stack(data, &TrainingPair::mask_onehot)).dice, best, 1e-12);
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i].best_loss, r.trace[i - 1].best_loss);
  EXPECT_LT(r.final_loss, r.initial_loss);
}

TEST(Smoke, CsvLayout) {
  std::vector<TraceRow> rows{{1, 0.5, 0.5, 0.001, std::nullopt}, {2, 0.25, 0.25, 0.001, 0.75}};
  std::ostringstream os;
  write_trace_csv(rows, os);
  EXPECT_EQ(os.str(), "step,loss,best_loss,lr,metric\n1,0.5,0.5,0.001,\n2,0.25,0.25,0.001,0.75\n");
}

TEST(Smoke, NonFiniteLossAbortsWithTrace) {
  auto data = synthetic_pairs(2, 32, 4);
  data[1].blurry_gray[5] = std::numeric_limits<float>::quiet_NaN();
  SmokeOptions o;
  o.steps = 3;
  o.seed = 2;
  const auto r = train_smoke(NetKind::mask_generator, smoke_config(), data, o);
  EXPECT_TRUE(r.diverged);
  EXPECT_FALSE(r.failure.empty());
  EXPECT_TRUE(r.trace.empty());
  EXPECT_EQ(r.weights, init_weights<float>(build_mask_generator(smoke_config()), derive_seed(2, 1)));
}

TEST(Smoke, RejectsNonToyScaleAndMismatchedData) {
  const auto data = synthetic_pairs(1, 32, 0);
  EXPECT_THROW(train_smoke(NetKind::smfd_unet, NetConfig{}, data, {}), InputError);
  auto cfg = smoke_config(16);
  EXPECT_THROW(train_smoke(NetKind::smfd_unet, cfg, data, {}), ShapeError);
  EXPECT_THROW(train_smoke(NetKind::smfd_unet, smoke_config(), {}, {}), InputError);
  SmokeOptions o;
  o.steps = -1;
  EXPECT_THROW(train_smoke(NetKind::smfd_unet, smoke_config(), data, o), InputError);
}
