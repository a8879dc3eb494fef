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

#include "ambix/render.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ambix/error.h"
#include "ambix/spatial.h"

namespace ambix {
namespace {

// Impulse trains for one accumulation target: trains[k][n] holds
// sum(weight * frac^k) of the images whose rounded delay is n.
class TaylorAccumulator {
 public:
  TaylorAccumulator(std::size_t fft_size, int terms)
      : trains_(terms, std::vector<double>(fft_size, 0.0)) {}

  void Add(double delay_samples, double weight) {
    const double n = std::round(delay_samples);
    const double frac = delay_samples - n;
    const auto index = static_cast<std::size_t>(n);
    double w = weight;
    for (auto& train : trains_) {
      train[index] += w;
      w *= frac;
    }
    touched_ = true;
  }

  bool touched() const { return touched_; }

  // sum_k (-jw)^k / k! * FFT(train_k), i.e. the exact spectrum of the
  // fractional-delay impulse sum.
  std::vector<Complex> Spectrum(const RealFft& fft) const {
    const std::size_t bins = fft.bins();
    std::vector<Complex> out(bins, 0.0);
    std::vector<Complex> term_spec(bins);
    std::vector<Complex> coeff(bins, 1.0);
    const double w0 = 2.0 * std::numbers::pi / static_cast<double>(fft.size());
    for (std::size_t k = 0; k < trains_.size(); ++k) {
      if (k > 0) {
        for (std::size_t m = 0; m < bins; ++m) {
          coeff[m] *= Complex(0.0, -w0 * static_cast<double>(m)) / static_cast<double>(k);
        }
      }
      fft.Forward(trains_[k], term_spec);
      for (std::size_t m = 0; m < bins; ++m) out[m] += coeff[m] * term_spec[m];
    }
    return out;
  }

 private:
  std::vector<std::vector<double>> trains_;
  bool touched_ = false;
};

}  // namespace

SceneField::SceneField(const Scene& scene, const std::vector<std::vector<double>>& sources,
                       int sample_rate, const DirectionGrid& grid, int atf_ir_length,
                       const RenderOptions& options)
    : sample_rate_(sample_rate),
      atf_ir_length_(atf_ir_length),
      grid_size_(grid.size()) {
  Require(sources.size() == scene.sources.size(), ErrorCode::kInvalidArgument,
          "need one source signal per scene source");
  Require(sample_rate > 0, ErrorCode::kInvalidArgument, "sample rate must be positive");
  Require(options.taylor_terms >= 1, ErrorCode::kInvalidArgument, "taylor_terms must be >= 1");
  std::size_t source_length = 0;
  for (const auto& s : sources) {
    Require(!s.empty(), ErrorCode::kInvalidArgument, "empty source signal");
    source_length = std::max(source_length, s.size());
  }

  ImageSourceOptions image_options = options.images;
  const double guard = 256.0;
  if (options.output_length > 0) {
    image_options.max_delay =
        std::min(image_options.max_delay,
                 (static_cast<double>(options.output_length) + guard) / sample_rate);
  }
  double latest = 0.0;
  for (std::size_t s = 0; s < scene.sources.size(); ++s) {
    image_sets_.push_back(ComputeImageSources(scene, static_cast<int>(s), image_options));
    for (const auto& img : image_sets_.back().images) latest = std::max(latest, img.delay);
  }
  const double delay_span = latest * sample_rate + atf_ir_length + 1;
  output_length_ = options.output_length > 0
                       ? options.output_length
                       : source_length + static_cast<std::size_t>(std::ceil(delay_span));
  // With a fixed output length the FFT size depends only on the signal
  // lengths, so renders of scene subsets share the same circular kernel and
  // superpose exactly.
  const std::size_t span =
      options.output_length > 0
          ? output_length_ + static_cast<std::size_t>(guard)
          : static_cast<std::size_t>(std::ceil(delay_span));
  fft_size_ = FastFftSize(source_length + span + 2 * atf_ir_length);
  const RealFft fft(fft_size_);
  const std::size_t bins = fft.bins();

  const int channels = ShChannelCount(options.order);
  const double shift = atf_ir_length / 2.0;
  std::vector<Complex> reference_spec(static_cast<std::size_t>(channels) * bins, 0.0);
  std::vector<Complex> source_spec(bins);
  for (std::size_t s = 0; s < sources.size(); ++s) {
    std::vector<double> padded(fft_size_, 0.0);
    std::copy(sources[s].begin(), sources[s].end(), padded.begin());
    fft.Forward(padded, source_spec);

    // Mic path: bucket images by nearest grid direction.
    std::map<int, std::vector<const ImageSource*>> buckets;
    for (const auto& img : image_sets_[s].images) {
      buckets[static_cast<int>(grid.Nearest(img.doa))].push_back(&img);
    }
    for (const auto& [d, imgs] : buckets) {
      TaylorAccumulator acc(fft_size_, options.taylor_terms);
      for (const ImageSource* img : imgs) acc.Add(img->delay * sample_rate, img->gain);
      const auto spec = acc.Spectrum(fft);
      auto& target = direction_spectra_[d];
      if (target.empty()) target.assign(bins, 0.0);
      for (std::size_t m = 0; m < bins; ++m) target[m] += spec[m] * source_spec[m];
    }

    // Reference path: exact DOA, same images.
    std::vector<std::vector<double>> sh;
    sh.reserve(image_sets_[s].images.size());
    for (const auto& img : image_sets_[s].images) {
      sh.push_back(ShVector(Direction::FromUnit(img.doa), options.order));
    }
    for (int l = 0; l < channels; ++l) {
      TaylorAccumulator acc(fft_size_, options.taylor_terms);
      for (std::size_t i = 0; i < sh.size(); ++i) {
        const auto& img = image_sets_[s].images[i];
        acc.Add(img.delay * sample_rate + shift, img.gain * sh[i][l]);
      }
      const auto spec = acc.Spectrum(fft);
      for (std::size_t m = 0; m < bins; ++m) {
        reference_spec[l * bins + m] += spec[m] * source_spec[m];
      }
    }
  }

  reference_ = AudioBuffer(channels, output_length_, sample_rate);
  std::vector<double> time(fft_size_);
  for (int l = 0; l < channels; ++l) {
    fft.Inverse({reference_spec.data() + l * bins, bins}, time);
    std::copy_n(time.begin(), output_length_, reference_.channels[l].begin());
  }
}

AudioBuffer SceneField::RenderMics(const AtfSet& atfs) const {
  Require(atfs.sample_rate() == sample_rate_, ErrorCode::kInvalidArgument,
          "ATF sample rate does not match the source sample rate");
  Require(atfs.IrLength() == atf_ir_length_, ErrorCode::kInvalidArgument,
          "ATF bin count differs from the one the field was built for");
  Require(static_cast<std::size_t>(atfs.directions()) == grid_size_,
          ErrorCode::kInvalidArgument, "ATF grid differs from the field grid");
  const RealFft fft(fft_size_);
  const std::size_t bins = fft.bins();
  AudioBuffer mic(atfs.mics(), output_length_, sample_rate_);
  std::vector<double> padded(fft_size_, 0.0);
  std::vector<Complex> ir_spec(bins);
  std::vector<Complex> acc(bins);
  std::vector<double> time(fft_size_);
  for (int p = 0; p < atfs.mics(); ++p) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (const auto& [d, spectrum] : direction_spectra_) {
      const auto ir = atfs.ShiftedIr(p, d);
      std::fill(padded.begin(), padded.end(), 0.0);
      std::copy(ir.begin(), ir.end(), padded.begin());
      fft.Forward(padded, ir_spec);
      for (std::size_t m = 0; m < bins; ++m) acc[m] += ir_spec[m] * spectrum[m];
    }
    fft.Inverse(acc, time);
    std::copy_n(time.begin(), output_length_, mic.channels[p].begin());
  }
  return mic;
}

RenderedScene RenderScene(const Scene& scene, const std::vector<std::vector<double>>& sources,
                          int sample_rate, const AtfSet& atfs, const RenderOptions& options) {
  Require(sample_rate == atfs.sample_rate(), ErrorCode::kInvalidArgument,
          "source sample rate " + std::to_string(sample_rate) +
              " does not match ATF sample rate " + std::to_string(atfs.sample_rate()));
  const SceneField field(scene, sources, sample_rate, atfs.grid(), atfs.IrLength(), options);
  return RenderedScene{field.RenderMics(atfs), field.reference(), field.image_sets()};
}

}  // namespace ambix
