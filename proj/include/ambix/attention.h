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

#ifndef AMBIX_ATTENTION_H_
#define AMBIX_ATTENTION_H_

#include "ambix/autodiff.h"

namespace ambix::nn {

template <typename T>
struct AttentionParams {
  Tensor<T> wq, bq, wk, bk, wv, bv, wo, bo;  // [C, C] weights, [C] biases
};

template <typename T>
struct AttentionOutput {
  Tensor<T> out;      // [B, T, C]
  Tensor<T> weights;  // [B, heads, T, D], rows sum to 1
};

// Batched multi-head attention: queries from q_src [B, T, C], keys and values
// from kv_src [B, D, C]. Each head computes softmax(Q K^T * scale) V on its
// C/heads slice; heads are concatenated and projected by wo.
template <typename T>
AttentionOutput<T> MultiheadAttention(const Tensor<T>& q_src, const Tensor<T>& kv_src,
                                      const AttentionParams<T>& p, int heads, double scale);

}  // namespace ambix::nn

#endif  // AMBIX_ATTENTION_H_
