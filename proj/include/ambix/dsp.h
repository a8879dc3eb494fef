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

#ifndef AMBIX_DSP_H_
#define AMBIX_DSP_H_

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace ambix {

using Complex = std::complex<double>;

// Real FFT of length n. Plans are shared process-wide; creation is guarded
// by a mutex and execution uses the thread-safe new-array interface.
class RealFft {
 public:
  explicit RealFft(std::size_t n);

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  // out has n/2+1 entries. Unnormalized.
  void Forward(std::span<const double> in, std::span<Complex> out) const;
  // Inverse with 1/n scaling; the imaginary parts of DC and Nyquist are ignored.
  void Inverse(std::span<const Complex> in, std::span<double> out) const;

 private:
  std::size_t n_;
  void* forward_plan_;
  void* inverse_plan_;
};

// Smallest n >= min_size of the form 2^a 3^b 5^c.
std::size_t FastFftSize(std::size_t min_size);

// Full linear convolution, length signal.size() + ir.size() - 1.
std::vector<double> FftConvolve(std::span<const double> signal,
                                std::span<const double> ir);

// Multichannel time-domain signal, channel-major.
struct AudioBuffer {
  int sample_rate = 24000;
  std::vector<std::vector<double>> channels;

  AudioBuffer() = default;
  AudioBuffer(std::size_t num_channels, std::size_t num_samples, int rate)
      : sample_rate(rate),
        channels(num_channels, std::vector<double>(num_samples, 0.0)) {}

  std::size_t num_channels() const { return channels.size(); }
  std::size_t num_samples() const {
    return channels.empty() ? 0 : channels.front().size();
  }
};

enum class WindowKind { kSqrtHann, kRectangular };

struct StftParams {
  int fft_size = 256;
  int frame_length = 128;
  int hop = 64;
  int sample_rate = 24000;
  WindowKind window = WindowKind::kSqrtHann;

  int bins() const { return fft_size / 2 + 1; }
  // Zeros prepended so every sample is covered by frame_length/hop frames.
  int front_padding() const { return frame_length - hop; }
  int FramesFor(std::size_t length) const;
  // Longest signal fully reconstructable from `frames` frames.
  std::size_t ReconstructableLength(int frames) const;

  void Validate() const;
  std::vector<double> AnalysisWindow() const;
  // Synthesis window normalised so that overlap-add of analysis*synthesis is 1.
  std::vector<double> SynthesisWindow() const;

  friend bool operator==(const StftParams&, const StftParams&) = default;
};

// Complex tensor channels x bins x frames, frame index fastest.
class Spectrogram {
 public:
  Spectrogram() = default;
  Spectrogram(int channels, int frames, const StftParams& params);

  int channels() const { return channels_; }
  int bins() const { return bins_; }
  int frames() const { return frames_; }
  const StftParams& params() const { return params_; }

  Complex& at(int c, int f, int t) {
    return data_[(static_cast<std::size_t>(c) * bins_ + f) * frames_ + t];
  }
  const Complex& at(int c, int f, int t) const {
    return data_[(static_cast<std::size_t>(c) * bins_ + f) * frames_ + t];
  }
  std::vector<Complex>& data() { return data_; }
  const std::vector<Complex>& data() const { return data_; }

 private:
  int channels_ = 0;
  int bins_ = 0;
  int frames_ = 0;
  StftParams params_;
  std::vector<Complex> data_;
};

Spectrogram Stft(const AudioBuffer& signal, const StftParams& params);
AudioBuffer Istft(const Spectrogram& spec, std::size_t length);

// Adjoints with respect to the real inner product that treats each complex
// bin as its (re, im) pair. StftAdjoint maps a spectrogram to a signal of
// the given length; IstftAdjoint maps a signal to a spectrogram.
AudioBuffer StftAdjoint(const Spectrogram& spec, std::size_t length);
Spectrogram IstftAdjoint(const AudioBuffer& signal, const StftParams& params,
                         int frames);

}  // namespace ambix

#endif  // AMBIX_DSP_H_
