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

#ifndef AMBIX_MODEL_H_
#define AMBIX_MODEL_H_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ambix/atf.h"
#include "ambix/attention.h"
#include "ambix/autodiff.h"
#include "ambix/dsp.h"
#include "ambix/optim.h"
#include "nlohmann/json.hpp"

namespace ambix::nn {

enum class AttentionScale { kKeyDimension, kFrames };

struct ModelConfig {
  int mics = 4;
  int order = 1;
  int channels = 256;  // C, also the attention model width
  int heads = 4;
  std::vector<int> conv_channels{64, 256};
  int kernel = 6;
  int bins = 129;      // F
  int atf_bins = 65;   // F_H
  int norm_groups = 8;
  double dropout = 0.1;
  AttentionScale attention_scale = AttentionScale::kKeyDimension;

  static ModelConfig Paper() { return {}; }
  static ModelConfig Desk();

  int ambi_channels() const { return (order + 1) * (order + 1); }
  // STFT framing implied by F: fft 2(F-1), frame half of that, hop a quarter.
  StftParams stft() const;
  double AttentionScaleValue(int frames) const;

  // kConfigError naming the violated constraint.
  void Validate() const;
  nlohmann::json ToJson() const;
  // Unknown keys are rejected with kConfigError.
  static ModelConfig FromJson(const nlohmann::json& j);
};

// Interleaved real views: channel 2c is the real part of channel c, 2c+1 the
// imaginary part.
template <typename T> Tensor<T> SpectrogramTensor(const Spectrogram& spec);  // [2C, F, T]
template <typename T> Tensor<T> AtfTensor(const AtfSet& atfs);             // [2P, D, F_H]
template <typename T>
Spectrogram TensorToSpectrogram(const Tensor<T>& x, const StftParams& params);

template <typename T>
struct ModelOutput {
  Tensor<T> mixing;     // [L, 2P, F, T]
  Tensor<T> spectrum;   // [2L, F, T]
  Tensor<T> signal;     // [L, length]
  Tensor<T> attention;  // [F, heads, T, D]
};

template <typename T>
class Model {
 public:
  // Weights and biases are drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in));
  // normalisation gains start at one and shifts at zero.
  Model(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  ParamStore<T>& params() { return params_; }
  const ParamStore<T>& params() const { return params_; }

  // x [2P, F, T] -> Z_X [F, T, C].
  Tensor<T> EncodeSignal(const Tensor<T>& x, bool training, std::mt19937_64* rng) const;
  // h [2P, D, F_H] -> Z_H [F, D, C].
  Tensor<T> EncodeDirectivity(const Tensor<T>& h) const;
  // Per-frequency attention of Z_X queries over Z_H keys and values.
  AttentionOutput<T> CrossAttention(const Tensor<T>& z_x, const Tensor<T>& z_h) const;
  // Z_Attn [F, T, C] -> E [L, 2P, F, T].
  Tensor<T> DecodeMixing(const Tensor<T>& z_attn) const;

  // Full pass. `rng` drives dropout and is required only when training.
  ModelOutput<T> Forward(const Tensor<T>& x, const Tensor<T>& h, std::size_t length,
                         bool training = false, std::mt19937_64* rng = nullptr) const;

 private:
  const Tensor<T>& P(const std::string& name) const { return params_.Get(name); }

  ModelConfig config_;
  ParamStore<T> params_;
};

// Mean of the attention weights over frequency, heads and frames: one value
// per direction.
template <typename T> std::vector<double> MeanAttention(const Tensor<T>& weights);

// CSV with header "f,head,t,d,weight".
template <typename T> void WriteAttentionCsv(const Tensor<T>& weights, const std::string& path);

}  // namespace ambix::nn

#endif  // AMBIX_MODEL_H_
