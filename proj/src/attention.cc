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

#include "ambix/attention.h"

#include "ambix/error.h"
#include "ambix/ops.h"

namespace ambix::nn {

template <typename T>
AttentionOutput<T> MultiheadAttention(const Tensor<T>& q_src, const Tensor<T>& kv_src,
                                      const AttentionParams<T>& p, int heads, double scale) {
  Require(q_src.rank() == 3 && kv_src.rank() == 3 && q_src.dim(0) == kv_src.dim(0) &&
              q_src.dim(2) == kv_src.dim(2),
          ErrorCode::kShapeError,
          "attention inputs must be [B, T, C] and [B, D, C], got " +
              ShapeString(q_src.shape()) + " and " + ShapeString(kv_src.shape()));
  const std::int64_t b = q_src.dim(0), t = q_src.dim(1), d = kv_src.dim(1), c = q_src.dim(2);
  Require(heads >= 1 && c % heads == 0, ErrorCode::kShapeError,
          "model dimension " + std::to_string(c) + " not divisible by " +
              std::to_string(heads) + " heads");
  const std::int64_t dk = c / heads;
  auto split = [&](const Tensor<T>& x, std::int64_t rows) {
    // [B, rows, C] -> [B*heads, rows, dk]
    auto r = Reshape(x, {b, rows, heads, dk});
    r = Permute(r, {0, 2, 1, 3});
    return Reshape(r, {b * heads, rows, dk});
  };
  // Scaling the queries equals scaling the scores and touches T/D fewer values.
  const auto q = Scale(split(Linear(q_src, p.wq, p.bq), t), static_cast<T>(scale));
  const auto k = split(Linear(kv_src, p.wk, p.bk), d);
  const auto v = split(Linear(kv_src, p.wv, p.bv), d);
  const auto weights = Softmax(BatchMatMul(q, k, false, true));  // [B*heads, T, D]
  auto o = BatchMatMul(weights, v);      // [B*heads, T, dk]
  o = Reshape(o, {b, heads, t, dk});
  o = Permute(o, {0, 2, 1, 3});
  o = Reshape(o, {b, t, c});
  return {Linear(o, p.wo, p.bo), Tensor<T>::Constant({b, heads, t, d}, weights.value())};
}

template AttentionOutput<float> MultiheadAttention(const Tensor<float>&, const Tensor<float>&,
                                                   const AttentionParams<float>&, int, double);
template AttentionOutput<double> MultiheadAttention(const Tensor<double>&,
                                                    const Tensor<double>&,
                                                    const AttentionParams<double>&, int, double);

}  // namespace ambix::nn
