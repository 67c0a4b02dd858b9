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
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "smfd/random.hpp"
#include "smfd/tensor.hpp"

namespace smfd {

struct GradCheckReport {
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool finite = true;
  bool passed = false;
  std::string worst;  // "input i, element j: analytic a vs numeric n"
};

using TensorList = std::vector<Tensor<double>>;
using ForwardFn = std::function<Tensor<double>(const TensorList&)>;
// Receives the inputs and d(loss)/d(output); returns d(loss)/d(input) for every input.
using AdjointFn = std::function<TensorList(const TensorList&, const Tensor<double>&)>;

// Contracts the output with a fixed random projection r, L = sum(r * f(x)), and compares the
// adjoint applied to r against central differences of L. Relative error is
// |a - n| / max(|a|, |n|, floor); the floor keeps exact zeros from dividing by rounding noise.
inline GradCheckReport grad_check(const ForwardFn& forward, const AdjointFn& adjoint, TensorList inputs,
                                  double tolerance, std::uint64_t seed = 0, double step = 1e-5,
                                  double floor = 1e-3) {
  GradCheckReport rep;
  rep.tolerance = tolerance;
  const Tensor<double> y0 = forward(inputs);
  Tensor<double> proj(y0.shape());
  Rng rng(seed);
  for (std::size_t i = 0; i < proj.size(); ++i) proj[i] = rng.uniform(-1.0, 1.0);

  auto loss = [&](const TensorList& in) {
    const Tensor<double> y = forward(in);
    double l = 0;
    for (std::size_t i = 0; i < y.size(); ++i) l += proj[i] * y[i];
    return l;
  };

  const TensorList analytic = adjoint(inputs, proj);
  if (analytic.size() != inputs.size()) {
    rep.finite = false;
    rep.worst = "adjoint returned " + std::to_string(analytic.size()) + " gradients for " +
                std::to_string(inputs.size()) + " inputs";
    return rep;
  }
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    if (analytic[t].shape() != inputs[t].shape()) {
      rep.finite = false;
      rep.worst = "gradient " + std::to_string(t) + " has shape " + to_string(analytic[t].shape());
      return rep;
    }
    for (std::size_t i = 0; i < inputs[t].size(); ++i) {
      const double a = analytic[t][i];
      const double saved = inputs[t][i];
      auto central = [&](double h) {
        inputs[t][i] = saved + h;
        const double lp = loss(inputs);
        inputs[t][i] = saved - h;
        const double lm = loss(inputs);
        inputs[t][i] = saved;
        return (lp - lm) / (2 * h);
      };
      auto rel_of = [&](double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor}); };
      double n = central(step);
      // A max/ReLU switch lying within `step` of the sample corrupts the difference quotient;
      // retry with smaller steps before declaring a mismatch.
      for (double h = step / 10; std::isfinite(n) && rel_of(n) > tolerance && h >= step / 100; h /= 10) {
        const double retry = central(h);
        if (!std::isfinite(retry) || rel_of(retry) < rel_of(n)) n = retry;
      }
      if (!std::isfinite(a) || !std::isfinite(n)) {
        rep.finite = false;
        rep.passed = false;
        rep.worst = "non-finite gradient at input " + std::to_string(t) + ", element " + std::to_string(i);
        return rep;
      }
      const double rel = rel_of(n);
      if (rel > rep.max_rel_error || rep.worst.empty()) {
        rep.max_rel_error = std::max(rep.max_rel_error, rel);
        std::ostringstream os;
        os << "input " << t << ", element " << i << ": analytic " << a << " vs numeric " << n;
        rep.worst = os.str();
      }
    }
  }
  rep.passed = rep.finite && rep.max_rel_error <= tolerance;
  return rep;
}

}  // namespace smfd
