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

#ifndef AMBIX_ROOM_H_
#define AMBIX_ROOM_H_

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ambix/atf.h"

namespace ambix {

struct ArrayConstraints {
  int num_mics = 4;
  double cube_size = 0.18;   // metres, centred on the array origin
  int lattice_steps = 24;    // points per axis
  double min_distance = 0.02;
  double max_distance = 0.18;
  int max_rejects = 100000;
};

// Coordinates are drawn from {i * cube/(steps-1) - cube/2}. Rejection
// sampling; kInternalError after max_rejects failed draws.
MicArrayGeometry SampleArray(std::mt19937_64& rng, const ArrayConstraints& c = {});

// True when every pairwise distance and lattice coordinate obeys `c`.
bool SatisfiesConstraints(const MicArrayGeometry& g, const ArrayConstraints& c = {});

struct SceneConfig {
  double room_min = 5.0;
  double room_max = 10.0;
  double rt60_min = 0.3;
  double rt60_max = 0.5;
  int min_sources = 1;
  int max_sources = 2;
  double source_wall_min = 0.3;
  double source_array_min = 2.0;
  // The array keeps at least fraction * min(dims) / 2 from every wall.
  double array_wall_fraction = 0.4;
  int max_retries = 1000;
};

struct SceneSource {
  Eigen::Vector3d position;
  std::string clip;         // audio reference, filled by the dataset builder
  std::size_t offset = 0;   // sample offset into the clip
};

struct Scene {
  Eigen::Vector3d room = {6.0, 6.0, 6.0};
  double rt60 = 0.4;
  std::vector<SceneSource> sources;
  Eigen::Vector3d array_position = {3.0, 3.0, 3.0};
  std::uint64_t seed = 0;
};

// Deterministic per seed. kConfigError when the constraints cannot be met
// within config.max_retries draws.
Scene SampleScene(std::uint64_t seed, const SceneConfig& config = {});

// Validates a scene against `config`.
bool SatisfiesConfig(const Scene& scene, const SceneConfig& config = {});

// Uniform Sabine absorption: min(1, 0.161 V / (rt60 S)).
double Rt60ToAbsorption(double rt60, const Eigen::Vector3d& room);

struct ImageSource {
  Eigen::Vector3d position;
  Eigen::Vector3d doa;      // unit vector from the array towards the image
  double distance = 0.0;    // metres
  double delay = 0.0;       // seconds
  double reflection_gain = 1.0;  // product of wall reflection coefficients
  double gain = 1.0;        // reflection_gain * direct_distance / distance
  int order = 0;
  int lattice[3] = {0, 0, 0};
  int parity[3] = {0, 0, 0};
};

struct ImageSourceSet {
  std::vector<ImageSource> images;  // sorted by delay, direct path first
  int max_order = 0;
  double reflection = 1.0;  // pressure reflection coefficient per bounce
};

struct ImageSourceOptions {
  // Negative: derived so that every image arriving within
  // tail_factor * rt60 is enumerated.
  int max_order = -1;
  double tail_factor = 1.5;
  // When set, used as a physical absorption coefficient with pressure
  // reflection sqrt(1 - a); 1 gives an anechoic room. Otherwise the
  // reflection coefficient is calibrated, starting from the Sabine
  // absorption, so that the image model's energy decay matches the rt60.
  std::optional<double> absorption;
  // Images arriving later than this are dropped.
  double max_delay = 1e30;
  std::size_t max_images = 1000000;
};

ImageSourceSet ComputeImageSources(const Scene& scene, int source_index,
                                   const ImageSourceOptions& options = {});

int DefaultMaxOrder(const Scene& scene, double tail_factor);

// Reverberation time from a Schroeder backward integral, fitting the decay
// between -5 and -(5 + range_db) dB and extrapolating to 60 dB.
double SchroederRt60(std::span<const double> rir, int sample_rate, double range_db = 20.0);

}  // namespace ambix

#endif  // AMBIX_ROOM_H_
