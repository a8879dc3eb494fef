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

#include "ambix/dsp.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>

#include "ambix/error.h"

namespace ambix {
namespace {

struct PlanPair {
  fftw_plan forward;
  fftw_plan inverse;
};

std::mutex& PlanMutex() {
  static std::mutex mu;
  return mu;
}

PlanPair GetPlans(std::size_t n) {
  static std::map<std::size_t, PlanPair>* cache = new std::map<std::size_t, PlanPair>();
  std::lock_guard<std::mutex> lock(PlanMutex());
  auto it = cache->find(n);
  if (it != cache->end()) return it->second;
  double* real = fftw_alloc_real(n);
  fftw_complex* spec = fftw_alloc_complex(n / 2 + 1);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair plans;
  plans.forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), real, spec, flags);
  plans.inverse = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec, real, flags);
  fftw_free(real);
  fftw_free(spec);
  Require(plans.forward != nullptr && plans.inverse != nullptr,
          ErrorCode::kInternalError, "fftw planning failed");
  cache->emplace(n, plans);
  return plans;
}

void CheckFinite(const Spectrogram& spec) {
  for (const auto& v : spec.data()) {
    Require(std::isfinite(v.real()) && std::isfinite(v.imag()),
            ErrorCode::kNumericalError, "non-finite spectrogram value");
  }
}

}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  Require(n >= 2 && n % 2 == 0, ErrorCode::kInvalidArgument,
          "real FFT size must be even and >= 2");
  const PlanPair plans = GetPlans(n);
  forward_plan_ = plans.forward;
  inverse_plan_ = plans.inverse;
}

void RealFft::Forward(std::span<const double> in, std::span<Complex> out) const {
  Require(in.size() == n_ && out.size() == bins(), ErrorCode::kInvalidArgument,
          "RealFft::Forward size mismatch");
  std::vector<double> buffer(in.begin(), in.end());
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), buffer.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void RealFft::Inverse(std::span<const Complex> in, std::span<double> out) const {
  Require(in.size() == bins() && out.size() == n_, ErrorCode::kInvalidArgument,
          "RealFft::Inverse size mismatch");
  // c2r destroys its input.
  std::vector<Complex> buffer(in.begin(), in.end());
  buffer.front().imag(0.0);
  buffer.back().imag(0.0);
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(buffer.data()), out.data());
  const double scale = 1.0 / static_cast<double>(n_);
  for (double& v : out) v *= scale;
}

std::size_t FastFftSize(std::size_t min_size) {
  std::size_t n = std::max<std::size_t>(min_size, 2);
  if (n % 2) ++n;
  for (;; n += 2) {
    std::size_t m = n;
    for (std::size_t p : {2, 3, 5}) {
      while (m % p == 0) m /= p;
    }
    if (m == 1) return n;
  }
}

std::vector<double> FftConvolve(std::span<const double> signal,
                                std::span<const double> ir) {
  Require(!signal.empty() && !ir.empty(), ErrorCode::kInvalidArgument,
          "convolution inputs must be nonempty");
  const std::size_t out_len = signal.size() + ir.size() - 1;
  const RealFft fft(FastFftSize(out_len));
  std::vector<double> a(fft.size(), 0.0), b(fft.size(), 0.0);
  std::copy(signal.begin(), signal.end(), a.begin());
  std::copy(ir.begin(), ir.end(), b.begin());
  std::vector<Complex> sa(fft.bins()), sb(fft.bins());
  fft.Forward(a, sa);
  fft.Forward(b, sb);
  for (std::size_t k = 0; k < sa.size(); ++k) sa[k] *= sb[k];
  fft.Inverse(sa, a);
  a.resize(out_len);
  return a;
}

int StftParams::FramesFor(std::size_t length) const {
  const std::size_t padded = length + front_padding();
  return static_cast<int>((padded + hop - 1) / hop);
}

std::size_t StftParams::ReconstructableLength(int frames) const {
  const long span = static_cast<long>(frames) * hop - front_padding();
  return span > 0 ? static_cast<std::size_t>(span) : 0;
}

void StftParams::Validate() const {
  Require(fft_size >= 2 && fft_size % 2 == 0, ErrorCode::kInvalidArgument,
          "fft_size must be even and positive");
  Require(frame_length >= 1 && frame_length <= fft_size, ErrorCode::kInvalidArgument,
          "frame_length must be in [1, fft_size]");
  Require(hop >= 1 && frame_length % hop == 0, ErrorCode::kInvalidArgument,
          "hop must divide frame_length");
  Require(sample_rate > 0, ErrorCode::kInvalidArgument, "sample_rate must be positive");
}

std::vector<double> StftParams::AnalysisWindow() const {
  std::vector<double> w(frame_length, 1.0);
  if (window == WindowKind::kSqrtHann) {
    for (int n = 0; n < frame_length; ++n) {
      w[n] = std::sin(std::numbers::pi * n / frame_length);
    }
  }
  return w;
}

std::vector<double> StftParams::SynthesisWindow() const {
  std::vector<double> w = AnalysisWindow();
  std::vector<double> overlap(hop, 0.0);
  for (int n = 0; n < frame_length; ++n) overlap[n % hop] += w[n] * w[n];
  for (int n = 0; n < frame_length; ++n) {
    Require(overlap[n % hop] > 0.0, ErrorCode::kInvalidArgument,
            "window does not satisfy overlap-add");
    w[n] /= overlap[n % hop];
  }
  return w;
}

Spectrogram::Spectrogram(int channels, int frames, const StftParams& params)
    : channels_(channels),
      bins_(params.bins()),
      frames_(frames),
      params_(params),
      data_(static_cast<std::size_t>(channels) * params.bins() * frames) {}

Spectrogram Stft(const AudioBuffer& signal, const StftParams& params) {
  params.Validate();
  Require(signal.num_channels() > 0 && signal.num_samples() > 0,
          ErrorCode::kInvalidArgument, "stft of an empty signal");
  const std::size_t length = signal.num_samples();
  const int frames = params.FramesFor(length);
  Spectrogram spec(static_cast<int>(signal.num_channels()), frames, params);
  const RealFft fft(params.fft_size);
  const auto window = params.AnalysisWindow();
  std::vector<double> frame(params.fft_size);
  std::vector<Complex> bins(params.bins());
  for (int c = 0; c < spec.channels(); ++c) {
    const auto& x = signal.channels[c];
    Require(x.size() == length, ErrorCode::kInvalidArgument, "ragged channels");
    for (int t = 0; t < frames; ++t) {
      const long start = static_cast<long>(t) * params.hop - params.front_padding();
      std::fill(frame.begin(), frame.end(), 0.0);
      for (int n = 0; n < params.frame_length; ++n) {
        const long i = start + n;
        if (i >= 0 && i < static_cast<long>(length)) frame[n] = window[n] * x[i];
      }
      fft.Forward(frame, bins);
      for (int f = 0; f < spec.bins(); ++f) spec.at(c, f, t) = bins[f];
    }
  }
  return spec;
}

AudioBuffer Istft(const Spectrogram& spec, std::size_t length) {
  const StftParams& params = spec.params();
  params.Validate();
  Require(length <= params.ReconstructableLength(spec.frames()),
          ErrorCode::kInvalidArgument,
          "requested length " + std::to_string(length) + " exceeds reconstructable span " +
              std::to_string(params.ReconstructableLength(spec.frames())));
  CheckFinite(spec);
  AudioBuffer out(spec.channels(), length, params.sample_rate);
  const RealFft fft(params.fft_size);
  const auto window = params.SynthesisWindow();
  std::vector<double> frame(params.fft_size);
  std::vector<Complex> bins(params.bins());
  for (int c = 0; c < spec.channels(); ++c) {
    auto& y = out.channels[c];
    for (int t = 0; t < spec.frames(); ++t) {
      const long start = static_cast<long>(t) * params.hop - params.front_padding();
      if (start >= static_cast<long>(length)) break;
      for (int f = 0; f < spec.bins(); ++f) bins[f] = spec.at(c, f, t);
      fft.Inverse(bins, frame);
      for (int n = 0; n < params.frame_length; ++n) {
        const long i = start + n;
        if (i >= 0 && i < static_cast<long>(length)) y[i] += window[n] * frame[n];
      }
    }
  }
  return out;
}

AudioBuffer StftAdjoint(const Spectrogram& spec, std::size_t length) {
  const StftParams& params = spec.params();
  AudioBuffer out(spec.channels(), length, params.sample_rate);
  const RealFft fft(params.fft_size);
  const auto window = params.AnalysisWindow();
  const int nyquist = params.fft_size / 2;
  const double n = params.fft_size;
  std::vector<double> frame(params.fft_size);
  std::vector<Complex> bins(params.bins());
  for (int c = 0; c < spec.channels(); ++c) {
    auto& x = out.channels[c];
    for (int t = 0; t < spec.frames(); ++t) {
      for (int f = 0; f < spec.bins(); ++f) {
        const double weight = (f == 0 || f == nyquist) ? 1.0 : 0.5;
        bins[f] = spec.at(c, f, t) * (weight * n);
      }
      fft.Inverse(bins, frame);
      const long start = static_cast<long>(t) * params.hop - params.front_padding();
      for (int k = 0; k < params.frame_length; ++k) {
        const long i = start + k;
        if (i >= 0 && i < static_cast<long>(length)) x[i] += window[k] * frame[k];
      }
    }
  }
  return out;
}

Spectrogram IstftAdjoint(const AudioBuffer& signal, const StftParams& params,
                         int frames) {
  params.Validate();
  Spectrogram spec(static_cast<int>(signal.num_channels()), frames, params);
  const RealFft fft(params.fft_size);
  const auto window = params.SynthesisWindow();
  const int nyquist = params.fft_size / 2;
  const double inv_n = 1.0 / params.fft_size;
  const long length = static_cast<long>(signal.num_samples());
  std::vector<double> frame(params.fft_size);
  std::vector<Complex> bins(params.bins());
  for (int c = 0; c < spec.channels(); ++c) {
    const auto& g = signal.channels[c];
    for (int t = 0; t < frames; ++t) {
      const long start = static_cast<long>(t) * params.hop - params.front_padding();
      std::fill(frame.begin(), frame.end(), 0.0);
      for (int k = 0; k < params.frame_length; ++k) {
        const long i = start + k;
        if (i >= 0 && i < length) frame[k] = window[k] * g[i];
      }
      fft.Forward(frame, bins);
      for (int f = 0; f < spec.bins(); ++f) {
        const double weight = (f == 0 || f == nyquist) ? 1.0 : 2.0;
        Complex v = bins[f] * (weight * inv_n);
        if (f == 0 || f == nyquist) v.imag(0.0);
        spec.at(c, f, t) = v;
      }
    }
  }
  return spec;
}

}  // namespace ambix
