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

#include "ambix/model.h"

#include <cmath>
#include <fstream>
#include <set>

#include "ambix/error.h"
#include "ambix/ops.h"

namespace ambix::nn {

ModelConfig ModelConfig::Desk() {
  ModelConfig c;
  c.channels = 64;
  c.conv_channels = {32, 64};
  return c;
}

StftParams ModelConfig::stft() const {
  StftParams p;
  p.fft_size = 2 * (bins - 1);
  p.frame_length = p.fft_size / 2;
  p.hop = p.fft_size / 4;
  return p;
}

double ModelConfig::AttentionScaleValue(int frames) const {
  if (attention_scale == AttentionScale::kFrames) return 1.0 / std::sqrt(double(frames));
  return 1.0 / std::sqrt(double(channels / heads));
}

void ModelConfig::Validate() const {
  auto check = [](bool ok, const std::string& what) {
    Require(ok, ErrorCode::kConfigError, "model config: " + what);
  };
  check(mics >= 1, "mics must be positive");
  check(order >= 0 && order <= 3, "order must lie in [0, 3]");
  check(channels > 2 * mics, "channels must exceed 2 * mics");
  check(heads >= 1 && channels % heads == 0, "channels must be divisible by heads");
  check(!conv_channels.empty() && conv_channels.back() == channels,
        "last conv channel count must equal channels");
  check(kernel >= 1, "kernel must be positive");
  check(norm_groups >= 1, "norm_groups must be positive");
  for (int c : conv_channels)
    check(c >= 1 && c % norm_groups == 0, "conv channels must be divisible by norm_groups");
  check(bins >= 3 && ((bins - 1) & (bins - 2)) == 0, "bins must be 2^k + 1");
  check(atf_bins >= 2 && bins <= 2 * atf_bins + 2,
        "atf_bins too small to upsample to bins");
  check(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
}

nlohmann::json ModelConfig::ToJson() const {
  return {{"mics", mics},
          {"order", order},
          {"channels", channels},
          {"heads", heads},
          {"conv_channels", conv_channels},
          {"kernel", kernel},
          {"bins", bins},
          {"atf_bins", atf_bins},
          {"norm_groups", norm_groups},
          {"dropout", dropout},
          {"attention_scale",
           attention_scale == AttentionScale::kFrames ? "frames" : "key_dimension"}};
}

ModelConfig ModelConfig::FromJson(const nlohmann::json& j) {
  Require(j.is_object(), ErrorCode::kConfigError, "model config must be an object");
  ModelConfig c;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "mics") c.mics = value.get<int>();
      else if (key == "order") c.order = value.get<int>();
      else if (key == "channels") c.channels = value.get<int>();
      else if (key == "heads") c.heads = value.get<int>();
      else if (key == "conv_channels") c.conv_channels = value.get<std::vector<int>>();
      else if (key == "kernel") c.kernel = value.get<int>();
      else if (key == "bins") c.bins = value.get<int>();
      else if (key == "atf_bins") c.atf_bins = value.get<int>();
      else if (key == "norm_groups") c.norm_groups = value.get<int>();
      else if (key == "dropout") c.dropout = value.get<double>();
      else if (key == "attention_scale") {
        const auto s = value.get<std::string>();
        Require(s == "frames" || s == "key_dimension", ErrorCode::kConfigError,
                "attention_scale must be \"key_dimension\" or \"frames\"");
        c.attention_scale = s == "frames" ? AttentionScale::kFrames : AttentionScale::kKeyDimension;
      } else {
        Fail(ErrorCode::kConfigError, "unknown model config key \"" + key + "\"");
      }
    } catch (const nlohmann::json::exception& e) {
      Fail(ErrorCode::kConfigError, "model config key \"" + key + "\": " + e.what());
    }
  }
  c.Validate();
  return c;
}

template <typename T>
Tensor<T> SpectrogramTensor(const Spectrogram& spec) {
  const int c = spec.channels(), f = spec.bins(), t = spec.frames();
  std::vector<T> v(static_cast<std::size_t>(2 * c) * f * t);
  const std::size_t plane = static_cast<std::size_t>(f) * t;
  for (int ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < plane; ++i) {
      const auto z = spec.data()[ch * plane + i];
      v[(2 * ch) * plane + i] = static_cast<T>(z.real());
      v[(2 * ch + 1) * plane + i] = static_cast<T>(z.imag());
    }
  return Tensor<T>::Constant({2 * c, f, t}, std::move(v));
}

template <typename T>
Tensor<T> AtfTensor(const AtfSet& atfs) {
  const int p = atfs.mics(), d = atfs.directions(), f = atfs.bins();
  const std::size_t plane = static_cast<std::size_t>(d) * f;
  std::vector<T> v(2 * p * plane);
  for (int m = 0; m < p; ++m)
    for (std::size_t i = 0; i < plane; ++i) {
      const auto z = atfs.values()[m * plane + i];
      v[(2 * m) * plane + i] = static_cast<T>(z.real());
      v[(2 * m + 1) * plane + i] = static_cast<T>(z.imag());
    }
  return Tensor<T>::Constant({2 * p, d, f}, std::move(v));
}

template <typename T>
Spectrogram TensorToSpectrogram(const Tensor<T>& x, const StftParams& params) {
  Require(x.rank() == 3 && x.dim(0) % 2 == 0 && x.dim(1) == params.bins(), ErrorCode::kShapeError,
          "expected an interleaved [2C, " + std::to_string(params.bins()) + ", T] tensor, got " +
              ShapeString(x.shape()));
  const int c = static_cast<int>(x.dim(0) / 2), t = static_cast<int>(x.dim(2));
  Spectrogram s(c, t, params);
  const std::size_t plane = static_cast<std::size_t>(params.bins()) * t;
  for (int ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < plane; ++i)
      s.data()[ch * plane + i] = {static_cast<double>(x.value()[(2 * ch) * plane + i]),
                                  static_cast<double>(x.value()[(2 * ch + 1) * plane + i])};
  return s;
}

template <typename T>
Model<T>::Model(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.Validate();
  std::mt19937_64 rng(seed);
  auto uniform = [&](const std::string& name, Shape shape, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    std::vector<T> v(NumElements(shape));
    for (auto& x : v) x = static_cast<T>(u(rng));
    params_.Add(name, std::move(shape), std::move(v));
  };
  auto norm = [&](const std::string& prefix, int ch) {
    params_.Add(prefix + ".gamma", {ch}, std::vector<T>(ch, T(1)));
    params_.Add(prefix + ".beta", {ch}, std::vector<T>(ch, T(0)));
  };
  const int k = config_.kernel, c = config_.channels, in = 2 * config_.mics;
  int prev = in;
  for (std::size_t i = 0; i < config_.conv_channels.size(); ++i) {
    const int out = config_.conv_channels[i];
    const auto prefix = "enc_sig.conv" + std::to_string(i);
    uniform(prefix + ".w", {out, prev, k, k}, prev * k * k);
    uniform(prefix + ".b", {out}, prev * k * k);
    norm("enc_sig.norm" + std::to_string(i), out);
    prev = out;
  }
  uniform("enc_dir.deconv.w", {in, c, 1, 4}, in * 4);
  uniform("enc_dir.deconv.b", {c}, in * 4);
  norm("enc_dir.norm", c);
  for (const char* m : {"q", "k", "v", "o"}) {
    uniform(std::string("attn.w") + m, {c, c}, c);
    uniform(std::string("attn.b") + m, {c}, c);
  }
  const int out = config_.ambi_channels() * 2 * config_.mics;
  uniform("dec.w", {out, c}, c);
  uniform("dec.b", {out}, c);
}

template <typename T>
Tensor<T> Model<T>::EncodeSignal(const Tensor<T>& x, bool training, std::mt19937_64* rng) const {
  Require(x.rank() == 3 && x.dim(0) == 2 * config_.mics && x.dim(1) == config_.bins,
          ErrorCode::kShapeError,
          "signal encoder expects [" + std::to_string(2 * config_.mics) + ", " +
              std::to_string(config_.bins) + ", T], got " + ShapeString(x.shape()));
  Require(!training || rng != nullptr, ErrorCode::kInvalidArgument,
          "training mode needs a dropout generator");
  std::mt19937_64 unused(0);
  Tensor<T> z = x;
  for (std::size_t i = 0; i < config_.conv_channels.size(); ++i) {
    const auto conv = "enc_sig.conv" + std::to_string(i), norm = "enc_sig.norm" + std::to_string(i);
    z = Conv2d(z, P(conv + ".w"), P(conv + ".b"));
    z = GroupNorm(z, P(norm + ".gamma"), P(norm + ".beta"), config_.norm_groups);
    z = Relu(z);
    z = Dropout(z, config_.dropout, training, rng ? *rng : unused);
  }
  return Permute(z, {1, 2, 0});
}

template <typename T>
Tensor<T> Model<T>::EncodeDirectivity(const Tensor<T>& h) const {
  Require(h.rank() == 3 && h.dim(0) == 2 * config_.mics && h.dim(2) == config_.atf_bins,
          ErrorCode::kShapeError,
          "directivity encoder expects [" + std::to_string(2 * config_.mics) + ", D, " +
              std::to_string(config_.atf_bins) + "], got " + ShapeString(h.shape()));
  auto z = ConvTranspose2d(h, P("enc_dir.deconv.w"), P("enc_dir.deconv.b"), 2);
  z = SliceLast(z, 0, config_.bins);  // [C, D, F]
  // Group norm over channel groups does not depend on the order of the other
  // axes, so normalising before the permute equals normalising after it.
  z = GroupNorm(z, P("enc_dir.norm.gamma"), P("enc_dir.norm.beta"), config_.norm_groups);
  z = Relu(z);
  return Permute(z, {2, 1, 0});
}

template <typename T>
AttentionOutput<T> Model<T>::CrossAttention(const Tensor<T>& z_x, const Tensor<T>& z_h) const {
  Require(z_x.rank() == 3 && z_h.rank() == 3 && z_x.dim(0) == z_h.dim(0), ErrorCode::kShapeError,
          "cross attention needs a shared frequency axis, got " + ShapeString(z_x.shape()) +
              " and " + ShapeString(z_h.shape()));
  AttentionParams<T> p{P("attn.wq"), P("attn.bq"), P("attn.wk"), P("attn.bk"),
                       P("attn.wv"), P("attn.bv"), P("attn.wo"), P("attn.bo")};
  return MultiheadAttention(z_x, z_h, p, config_.heads,
                            config_.AttentionScaleValue(static_cast<int>(z_x.dim(1))));
}

template <typename T>
Tensor<T> Model<T>::DecodeMixing(const Tensor<T>& z_attn) const {
  Require(z_attn.rank() == 3 && z_attn.dim(2) == config_.channels, ErrorCode::kShapeError,
          "decoder expects [F, T, " + std::to_string(config_.channels) + "], got " +
              ShapeString(z_attn.shape()));
  const std::int64_t f = z_attn.dim(0), t = z_attn.dim(1);
  auto e = Linear(z_attn, P("dec.w"), P("dec.b"));
  e = Reshape(e, {f, t, config_.ambi_channels(), 2 * config_.mics});
  return Permute(e, {2, 3, 0, 1});
}

template <typename T>
ModelOutput<T> Model<T>::Forward(const Tensor<T>& x, const Tensor<T>& h, std::size_t length,
                                 bool training, std::mt19937_64* rng) const {
  const auto z_x = EncodeSignal(x, training, rng);
  const auto z_h = EncodeDirectivity(h);
  auto attn = CrossAttention(z_x, z_h);
  ModelOutput<T> out;
  out.mixing = DecodeMixing(attn.out);
  out.spectrum = Mix(out.mixing, x);
  out.signal = IstftLayer(out.spectrum, config_.stft(), length);
  out.attention = attn.weights;
  return out;
}

template <typename T>
std::vector<double> MeanAttention(const Tensor<T>& weights) {
  Require(weights.rank() == 4, ErrorCode::kShapeError,
          "attention weights must be [F, heads, T, D], got " + ShapeString(weights.shape()));
  const auto d = weights.dim(3);
  const auto rows = weights.size() / d;
  std::vector<double> mean(d, 0.0);
  for (std::int64_t r = 0; r < rows; ++r)
    for (std::int64_t i = 0; i < d; ++i) mean[i] += weights.value()[r * d + i];
  for (auto& m : mean) m /= static_cast<double>(rows);
  return mean;
}

template <typename T>
void WriteAttentionCsv(const Tensor<T>& weights, const std::string& path) {
  Require(weights.rank() == 4, ErrorCode::kShapeError,
          "attention weights must be [F, heads, T, D], got " + ShapeString(weights.shape()));
  std::ofstream out(path);
  Require(static_cast<bool>(out), ErrorCode::kIoError, "cannot write " + path);
  out << "f,head,t,d,weight\n";
  const auto& s = weights.shape();
  std::size_t i = 0;
  for (std::int64_t f = 0; f < s[0]; ++f)
    for (std::int64_t h = 0; h < s[1]; ++h)
      for (std::int64_t t = 0; t < s[2]; ++t)
        for (std::int64_t d = 0; d < s[3]; ++d)
          out << f << ',' << h << ',' << t << ',' << d << ',' << weights.value()[i++] << '\n';
  Require(static_cast<bool>(out), ErrorCode::kIoError, "failed writing " + path);
}

#define AMBIX_INSTANTIATE(T)                                                           \
  template Tensor<T> SpectrogramTensor<T>(const Spectrogram&);                         \
  template Tensor<T> AtfTensor<T>(const AtfSet&);                                      \
  template Spectrogram TensorToSpectrogram<T>(const Tensor<T>&, const StftParams&);    \
  template class Model<T>;                                                             \
  template std::vector<double> MeanAttention<T>(const Tensor<T>&);                     \
  template void WriteAttentionCsv<T>(const Tensor<T>&, const std::string&);

AMBIX_INSTANTIATE(float)
AMBIX_INSTANTIATE(double)
#undef AMBIX_INSTANTIATE

}  // namespace ambix::nn
