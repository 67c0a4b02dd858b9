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

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "smfd/error.hpp"
#include "smfd/tensor.hpp"

namespace smfd {

template <typename T>
double mse(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "mse");
  double acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

inline double psnr_from_mse(double m, double max_value) {
  if (!(max_value > 0)) throw InputError("psnr max_value must be positive");
  if (m < 0 || std::isnan(m)) throw NumericError("psnr given an invalid mse");
  if (m == 0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(max_value * max_value / m);
}

template <typename T>
double psnr(const Tensor<T>& a, const Tensor<T>& b, double max_value) {
  return psnr_from_mse(mse(a, b), max_value);
}

namespace detail {

// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
inline std::vector<double> gaussian_taps(int size, double sigma) {
  std::vector<double> g(size);
  double sum = 0;
  for (int i = 0; i < size; ++i) {
    const double x = i - (size - 1) / 2.0;
    sum += g[i] = std::exp(-x * x / (2 * sigma * sigma));
  }
  for (double& v : g) v /= sum;
  return g;
}

// Valid-window separable filtering of one channel plane.
inline std::vector<double> filter_valid(const std::vector<double>& plane, int h, int w, const std::vector<double>& g) {
  const int k = static_cast<int>(g.size()), oh = h - k + 1, ow = w - k + 1;
  std::vector<double> rows(static_cast<std::size_t>(h) * ow), out(static_cast<std::size_t>(oh) * ow);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0;
      for (int t = 0; t < k; ++t) s += g[t] * plane[static_cast<std::size_t>(y) * w + x + t];
      rows[static_cast<std::size_t>(y) * ow + x] = s;
    }
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0;
      for (int t = 0; t < k; ++t) s += g[t] * rows[static_cast<std::size_t>(y + t) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = s;
    }
  return out;
}

}  // namespace detail

// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), valid windows only,
// mean over window positions and channels. Accepts (H,W) or (H,W,C).
template <typename T>
double ssim(const Tensor<T>& a, const Tensor<T>& b, double max_value) {
  require_same_shape(a, b, "ssim");
  if (a.rank() != 2 && a.rank() != 3) throw ShapeError("ssim expects (H,W) or (H,W,C), got " + to_string(a.shape()));
  if (!(max_value > 0)) throw InputError("ssim max_value must be positive");
  constexpr int kWin = 11;
  const int h = a.dim(0), w = a.dim(1), c = a.rank() == 3 ? a.dim(2) : 1;
  if (h < kWin || w < kWin)
    throw ShapeError("ssim needs spatial extents of at least 11, got " + to_string(a.shape()));
  const double c1 = (0.01 * max_value) * (0.01 * max_value), c2 = (0.03 * max_value) * (0.03 * max_value);
  const auto g = detail::gaussian_taps(kWin, 1.5);
  const std::size_t n = static_cast<std::size_t>(h) * w;
  double total = 0;
  std::size_t count = 0;
  std::vector<double> pa(n), pb(n), paa(n), pbb(n), pab(n);
  for (int ch = 0; ch < c; ++ch) {
    for (std::size_t p = 0; p < n; ++p) {
      pa[p] = static_cast<double>(a[p * c + ch]);
      pb[p] = static_cast<double>(b[p * c + ch]);
      paa[p] = pa[p] * pa[p];
      pbb[p] = pb[p] * pb[p];
      pab[p] = pa[p] * pb[p];
    }
    const auto ma = detail::filter_valid(pa, h, w, g), mb = detail::filter_valid(pb, h, w, g);
    const auto saa = detail::filter_valid(paa, h, w, g), sbb = detail::filter_valid(pbb, h, w, g);
    const auto sab = detail::filter_valid(pab, h, w, g);
    for (std::size_t i = 0; i < ma.size(); ++i) {
      const double va = saa[i] - ma[i] * ma[i], vb = sbb[i] - mb[i] * mb[i], cov = sab[i] - ma[i] * mb[i];
      total += ((2 * ma[i] * mb[i] + c1) * (2 * cov + c2)) / ((ma[i] * ma[i] + mb[i] * mb[i] + c1) * (va + vb + c2));
    }
    count += ma.size();
  }
  return total / static_cast<double>(count);
}

struct OverlapScores {
  double dice = 0, dice_loss = 0, jaccard = 0;
  std::vector<double> dice_per_channel, jaccard_per_channel;
};

// Soft Dice/Jaccard per channel (last axis), averaged. An empty-vs-empty channel scores 1.
template <typename T>
OverlapScores dice_jaccard(const Tensor<T>& pred, const Tensor<T>& truth) {
  require_same_shape(pred, truth, "dice_jaccard");
  const int c = pred.dim(-1);
  std::vector<double> inter(c), sp(c), st(c);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const int ch = static_cast<int>(i % c);
    const double p = static_cast<double>(pred[i]), t = static_cast<double>(truth[i]);
    inter[ch] += p * t;
    sp[ch] += p;
    st[ch] += t;
  }
  OverlapScores s;
  for (int ch = 0; ch < c; ++ch) {
    const double denom = sp[ch] + st[ch], uni = denom - inter[ch];
    const double d = denom == 0 ? 1.0 : 2 * inter[ch] / denom;
    const double j = uni == 0 ? 1.0 : inter[ch] / uni;
    s.dice_per_channel.push_back(d);
    s.jaccard_per_channel.push_back(j);
    s.dice += d / c;
    s.jaccard += j / c;
  }
  s.dice_loss = 1.0 - s.dice;
  return s;
}

struct GaussianStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  void validate(double tol = 1e-9) const {
    if (cov.rows() != mean.size() || cov.cols() != mean.size())
      throw ShapeError("gaussian stats: covariance is not d x d for mean of length " + std::to_string(mean.size()));
    if (!mean.allFinite() || !cov.allFinite()) throw NumericError("gaussian stats contain non-finite values");
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > tol) throw InputError("gaussian stats: covariance not symmetric");
    if (mean.size() > 0 && Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cov, Eigen::EigenvaluesOnly).eigenvalues().minCoeff() < -tol)
      throw InputError("gaussian stats: covariance not positive semidefinite");
  }
};

namespace detail {
inline Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}
}  // namespace detail

// ||mu_p - mu_q||^2 + Tr(S_p + S_q - 2 sqrt(S_p^1/2 S_q S_p^1/2)).
inline double frechet_distance(const GaussianStats& p, const GaussianStats& q) {
  if (p.mean.size() != q.mean.size())
    throw ShapeError("frechet_distance: dimensions " + std::to_string(p.mean.size()) + " and " +
                     std::to_string(q.mean.size()));
  p.validate();
  q.validate();
  const Eigen::MatrixXd sp = detail::psd_sqrt(p.cov);
  const Eigen::MatrixXd inner = sp * q.cov * sp;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (inner + inner.transpose()), Eigen::EigenvaluesOnly);
  const double tr_sqrt = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double d = (p.mean - q.mean).squaredNorm() + p.cov.trace() + q.cov.trace() - 2 * tr_sqrt;
  if (d < -1e-6) throw NumericError("frechet_distance came out negative: " + std::to_string(d));
  return std::max(d, 0.0);
}

struct MetricReport {
  std::optional<double> mse, psnr_db, ssim, dice, dice_loss, jaccard;

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    auto put = [&](const char* key, const std::optional<double>& v) {
      if (!v) return;
      if (std::isinf(*v)) j[key] = *v > 0 ? "inf" : "-inf";
      else j[key] = *v;
    };
    put("mse", mse);
    put("psnr", psnr_db);
    put("ssim", ssim);
    put("dice", dice);
    put("dice_loss", dice_loss);
    put("jaccard", jaccard);
    return j;
  }
};

template <typename T>
MetricReport image_report(const Tensor<T>& ref, const Tensor<T>& test, double max_value) {
  MetricReport r;
  r.mse = mse(ref, test);
  r.psnr_db = psnr_from_mse(*r.mse, max_value);
  r.ssim = ssim(ref, test, max_value);
  return r;
}

}  // namespace smfd
