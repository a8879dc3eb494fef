// Copyright 2026 The Ambix Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef AMBIX_TESTS_GRADCHECK_H_
#define AMBIX_TESTS_GRADCHECK_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "ambix/autodiff.h"
#include "ambix/ops.h"

namespace ambix::nn::testing {

using Fn = std::function<Tensor<double>(const std::vector<Tensor<double>>&)>;

inline Tensor<double> RandomParam(Shape shape, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  std::vector<double> v(NumElements(shape));
  for (auto& x : v) x = n(rng);
  return Tensor<double>::Parameter(std::move(shape), std::move(v));
}

// Largest elementwise relative error between the backward pass and central
// finite differences of loss = sum(f(inputs) * probe) for a fixed random
// probe. Elements are compared relative to max(|analytic|, |numeric|), with a
// floor of 1e-3 of the largest numeric gradient over all inputs so that
// entries that are zero up to rounding (a key bias under softmax) do not
// dominate.
inline double MaxGradError(const Fn& f, std::vector<Tensor<double>> inputs, unsigned seed = 1,
                           double step = 1e-5) {
  std::mt19937_64 rng(seed);
  const auto first = f(inputs);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> pv(first.size());
  for (auto& v : pv) v = n(rng);
  const auto probe = Tensor<double>::Constant(first.shape(), pv);
  auto loss_of = [&]() { return Sum(Mul(f(inputs), probe)); };
  for (auto& in : inputs) in.ZeroGrad();
  Backward(loss_of());
  std::vector<std::vector<double>> analytic, numeric;
  double scale = 0.0;
  for (auto& in : inputs) {
    analytic.push_back(in.grad());
    if (analytic.back().empty()) analytic.back().assign(in.size(), 0.0);
    auto& num = numeric.emplace_back(in.size());
    for (std::int64_t i = 0; i < in.size(); ++i) {
      const double keep = in.value()[i];
      in.value()[i] = keep + step;
      const double up = loss_of().item();
      in.value()[i] = keep - step;
      const double down = loss_of().item();
      in.value()[i] = keep;
      num[i] = (up - down) / (2 * step);
      scale = std::max(scale, std::abs(num[i]));
    }
  }
  const double floor = std::max(1e-3 * scale, 1e-10);
  double worst = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k)
    for (std::size_t i = 0; i < numeric[k].size(); ++i) {
      const double a = analytic[k][i], n = numeric[k][i];
      worst = std::max(worst, std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor}));
    }
  return worst;
}

}  // namespace ambix::nn::testing

#endif  // AMBIX_TESTS_GRADCHECK_H_
