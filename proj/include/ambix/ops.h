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

#ifndef AMBIX_OPS_H_
#define AMBIX_OPS_H_

#include <cstdint>
#include <random>
#include <vector>

#include "ambix/autodiff.h"
#include "ambix/dsp.h"

namespace ambix::nn {

template <typename T> Tensor<T> Add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> Mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> Scale(const Tensor<T>& x, T s);
template <typename T> Tensor<T> Sum(const Tensor<T>& x);
template <typename T> Tensor<T> Relu(const Tensor<T>& x);

// Inverted dropout: kept entries are scaled by 1/(1-p) in training; identity
// otherwise. p must lie in [0, 1).
template <typename T>
Tensor<T> Dropout(const Tensor<T>& x, double p, bool training, std::mt19937_64& rng);

template <typename T> Tensor<T> Reshape(const Tensor<T>& x, Shape shape);
// out.shape[i] = x.shape[perm[i]]; up to 4 axes.
template <typename T> Tensor<T> Permute(const Tensor<T>& x, const std::vector<int>& perm);
// x[..., start:start+length] along the last axis.
template <typename T> Tensor<T> SliceLast(const Tensor<T>& x, std::int64_t start, std::int64_t length);

// y = x W^T + b over the last axis; W is [out, in], b is [out] or undefined.
template <typename T>
Tensor<T> Linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b);

// [B, M, K] x [B, K, N] -> [B, M, N], with optional transposes of the
// trailing two axes.
template <typename T>
Tensor<T> BatchMatMul(const Tensor<T>& a, const Tensor<T>& b, bool transpose_a = false,
                      bool transpose_b = false);

// Softmax over the last axis.
template <typename T> Tensor<T> Softmax(const Tensor<T>& x);

// x [C_in, A, B], w [C_out, C_in, k, k], b [C_out]. "Same" padding with
// k/2 zeros before and k-1-k/2 after on each axis.
template <typename T>
Tensor<T> Conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b);

// x [C_in, D, F], w [C_in, C_out, 1, kw], b [C_out], stride (1, s):
// out [C_out, D, (F-1)*s + kw].
template <typename T>
Tensor<T> ConvTranspose2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                          int stride);

// Normalises x [C, ...] over (C/groups channels x remaining axes), then
// applies the per-channel affine gamma, beta.
template <typename T>
Tensor<T> GroupNorm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                    int groups, double eps = 1e-5);

// Complex mixing in real form. e [L, 2P, F, T] and x [2P, F, T] hold
// interleaved (re, im) pairs per microphone; out [2L, F, T] likewise:
// out_l = sum_p e_{l,p} x_p.
template <typename T> Tensor<T> Mix(const Tensor<T>& e, const Tensor<T>& x);

// Inverse STFT of an interleaved spectrogram x [2L, F, T] to [L, length].
// Linear; the backward pass is the exact adjoint.
template <typename T>
Tensor<T> IstftLayer(const Tensor<T>& x, const StftParams& params, std::size_t length);

// mean((a - b)^2).
template <typename T> Tensor<T> MseLoss(const Tensor<T>& a, const Tensor<T>& b);

}  // namespace ambix::nn

#endif  // AMBIX_OPS_H_
