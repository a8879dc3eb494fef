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

#ifndef AMBIX_RENDER_H_
#define AMBIX_RENDER_H_

#include <cstddef>
#include <map>
#include <vector>

#include "ambix/atf.h"
#include "ambix/dsp.h"
#include "ambix/room.h"

namespace ambix {

struct RenderOptions {
  int order = 1;                  // Ambisonic order of the reference
  std::size_t output_length = 0;  // samples; 0 renders the full tail
  ImageSourceOptions images;
  int taylor_terms = 20;
};

// The sound field of one scene at the array position, split per grid
// direction so that any number of arrays sharing the grid can be rendered
// from it.
//
// Image delays are applied exactly in the frequency domain. Each delay is
// split into an integer part and a fraction |d| <= 1/2, and e^{-jw d} is
// expanded as a Taylor series; every term is one FFT of an impulse train,
// so the cost scales with directions rather than with image count.
//
// Mic signals use the ATF of the grid direction nearest each image's DOA;
// the reference uses closed-form SH of the exact DOA delayed by half the ATF
// impulse-response length, matching the causal shift applied to the ATFs.
class SceneField {
 public:
  SceneField(const Scene& scene, const std::vector<std::vector<double>>& sources,
             int sample_rate, const DirectionGrid& grid, int atf_ir_length,
             const RenderOptions& options);

  AudioBuffer RenderMics(const AtfSet& atfs) const;
  const AudioBuffer& reference() const { return reference_; }
  const std::vector<ImageSourceSet>& image_sets() const { return image_sets_; }
  std::size_t output_length() const { return output_length_; }
  int modeling_delay() const { return atf_ir_length_ / 2; }

 private:
  int sample_rate_;
  int atf_ir_length_;
  std::size_t grid_size_;
  std::size_t fft_size_;
  std::size_t output_length_;
  std::vector<ImageSourceSet> image_sets_;
  std::map<int, std::vector<Complex>> direction_spectra_;
  AudioBuffer reference_;
};

struct RenderedScene {
  AudioBuffer mic;
  AudioBuffer reference;
  std::vector<ImageSourceSet> image_sets;
};

// One source signal per scene source, all at atfs.sample_rate().
RenderedScene RenderScene(const Scene& scene,
                          const std::vector<std::vector<double>>& sources,
                          int sample_rate, const AtfSet& atfs,
                          const RenderOptions& options = {});

}  // namespace ambix

#endif  // AMBIX_RENDER_H_
