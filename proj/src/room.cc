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

#include "ambix/room.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "ambix/error.h"

namespace ambix {
namespace {

double LatticeStep(const ArrayConstraints& c) { return c.cube_size / (c.lattice_steps - 1); }

double Uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double DecayTime(std::span<const double> energy, double bin_seconds, double range_db) {
  std::vector<double> edc(energy.size());
  double acc = 0.0;
  for (std::size_t i = energy.size(); i-- > 0;) {
    acc += energy[i];
    edc[i] = acc;
  }
  Require(acc > 0, ErrorCode::kNumericalError, "impulse response has no energy");
  const double start_db = -5.0;
  const double stop_db = start_db - range_db;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long count = 0;
  bool reached = false;
  for (std::size_t i = 0; i < edc.size(); ++i) {
    const double db = 10 * std::log10(std::max(edc[i] / acc, 1e-300));
    if (db > start_db) continue;
    if (db < stop_db) {
      reached = true;
      break;
    }
    const double t = static_cast<double>(i) * bin_seconds;
    sx += t;
    sy += db;
    sxx += t * t;
    sxy += t * db;
    ++count;
  }
  Require(reached && count >= 2, ErrorCode::kNumericalError,
          "energy decay does not span the fitting range");
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  Require(slope < 0, ErrorCode::kNumericalError, "energy decay is not decreasing");
  return -60.0 / slope;
}

// Visits every image of `src` up to `max_order` arriving within `max_delay`.
template <typename Visit>
void ForEachImage(const Scene& scene, const Eigen::Vector3d& src, int max_order,
                  double max_delay, Visit&& visit) {
  const double radius = std::min(max_delay * kSpeedOfSound, 1e7);
  int bound[3];
  for (int k = 0; k < 3; ++k) {
    const int by_order = (max_order + 1) / 2;
    const int by_radius = static_cast<int>(std::floor(radius / (2 * scene.room[k]))) + 1;
    bound[k] = std::min(by_order, by_radius);
  }
  for (int nx = -bound[0]; nx <= bound[0]; ++nx) {
    for (int ny = -bound[1]; ny <= bound[1]; ++ny) {
      for (int nz = -bound[2]; nz <= bound[2]; ++nz) {
        const int n[3] = {nx, ny, nz};
        for (int q = 0; q < 8; ++q) {
          const int parity[3] = {q & 1, (q >> 1) & 1, (q >> 2) & 1};
          int order = 0;
          Eigen::Vector3d pos;
          for (int k = 0; k < 3; ++k) {
            order += std::abs(n[k] - parity[k]) + std::abs(n[k]);
            pos[k] = (1 - 2 * parity[k]) * src[k] + 2 * n[k] * scene.room[k];
          }
          if (order > max_order) continue;
          const double dist = (pos - scene.array_position).norm();
          if (dist / kSpeedOfSound > max_delay && order > 0) continue;
          visit(n, parity, order, pos, dist);
        }
      }
    }
  }
}

// Per-reflection energy loss a (reflection coefficient e^{-a/2}) for which
// the image model's energy decay curve reaches the scene rt60. In a
// rectangular room with uniform absorption the late tail is carried by the
// near-axial images, which reflect less often than the diffuse average, so
// the Sabine absorption alone decays too slowly.
double CalibratedLoss(const Scene& scene, const Eigen::Vector3d& src, double tail_factor) {
  const double sabine = Rt60ToAbsorption(scene.rt60, scene.room);
  const double window = std::max(tail_factor, 1.5) * scene.rt60;
  const int max_order = DefaultMaxOrder(scene, window / scene.rt60);
  const double bin = 1e-3;
  const int bins = static_cast<int>(std::ceil(window / bin)) + 1;
  // energy[order][time bin] of the distance attenuation alone.
  std::vector<std::vector<double>> energy(max_order + 1, std::vector<double>(bins, 0.0));
  ForEachImage(scene, src, max_order, window,
               [&](const int*, const int*, int order, const Eigen::Vector3d&, double dist) {
                 const int b = static_cast<int>(dist / kSpeedOfSound / bin);
                 if (b < bins) energy[order][b] += 1.0 / (dist * dist);
               });
  auto decay = [&](double loss) {
    std::vector<double> curve(bins, 0.0);
    for (int k = 0; k <= max_order; ++k) {
      const double g = std::exp(-loss * k);
      for (int b = 0; b < bins; ++b) curve[b] += g * energy[k][b];
    }
    return DecayTime(curve, bin, 20.0);
  };
  try {
    double lo = sabine, hi = sabine;
    // The decay time falls as the loss grows.
    while (decay(lo) < scene.rt60 && lo > 1e-4) lo *= 0.5;
    while (decay(hi) > scene.rt60 && hi < 20.0) hi *= 2.0;
    for (int it = 0; it < 50; ++it) {
      const double mid = 0.5 * (lo + hi);
      (decay(mid) > scene.rt60 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  } catch (const Error&) {
    return sabine;
  }
}

}  // namespace

bool SatisfiesConstraints(const MicArrayGeometry& g, const ArrayConstraints& c) {
  if (g.size() != c.num_mics) return false;
  const double step = LatticeStep(c);
  for (const auto& p : g.positions) {
    for (int k = 0; k < 3; ++k) {
      const double index = (p[k] + c.cube_size / 2) / step;
      if (std::abs(index - std::round(index)) > 1e-9) return false;
      if (index < -1e-9 || index > c.lattice_steps - 1 + 1e-9) return false;
    }
  }
  for (int i = 0; i < g.size(); ++i) {
    for (int j = i + 1; j < g.size(); ++j) {
      const double d = (g.positions[i] - g.positions[j]).norm();
      if (d < c.min_distance - 1e-12 || d > c.max_distance + 1e-12) return false;
    }
  }
  return true;
}

MicArrayGeometry SampleArray(std::mt19937_64& rng, const ArrayConstraints& c) {
  Require(c.num_mics >= 1 && c.lattice_steps >= 2 && c.cube_size > 0,
          ErrorCode::kInvalidArgument, "invalid array constraints");
  std::uniform_int_distribution<int> index(0, c.lattice_steps - 1);
  const double step = LatticeStep(c);
  MicArrayGeometry g;
  g.positions.resize(c.num_mics);
  for (int attempt = 0; attempt < c.max_rejects; ++attempt) {
    for (auto& p : g.positions) {
      for (int k = 0; k < 3; ++k) p[k] = index(rng) * step - c.cube_size / 2;
    }
    if (SatisfiesConstraints(g, c)) return g;
  }
  Fail(ErrorCode::kInternalError, "array sampling exceeded " +
                                      std::to_string(c.max_rejects) + " rejections");
}

bool SatisfiesConfig(const Scene& scene, const SceneConfig& config) {
  for (int k = 0; k < 3; ++k) {
    if (scene.room[k] < config.room_min || scene.room[k] > config.room_max) return false;
  }
  if (scene.rt60 < config.rt60_min || scene.rt60 > config.rt60_max) return false;
  const int n = static_cast<int>(scene.sources.size());
  if (n < config.min_sources || n > config.max_sources) return false;
  const double margin = config.array_wall_fraction * scene.room.minCoeff() / 2;
  for (int k = 0; k < 3; ++k) {
    if (scene.array_position[k] < margin - 1e-12 ||
        scene.array_position[k] > scene.room[k] - margin + 1e-12) {
      return false;
    }
  }
  for (const auto& s : scene.sources) {
    for (int k = 0; k < 3; ++k) {
      if (s.position[k] < config.source_wall_min - 1e-12 ||
          s.position[k] > scene.room[k] - config.source_wall_min + 1e-12) {
        return false;
      }
    }
    if ((s.position - scene.array_position).norm() < config.source_array_min) return false;
  }
  return true;
}

Scene SampleScene(std::uint64_t seed, const SceneConfig& config) {
  Require(config.room_min > 0 && config.room_min <= config.room_max &&
              config.rt60_min > 0 && config.rt60_min <= config.rt60_max &&
              config.min_sources >= 1 && config.min_sources <= config.max_sources &&
              config.array_wall_fraction >= 0 && config.array_wall_fraction < 1,
          ErrorCode::kConfigError, "scene config ranges are empty or invalid");
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < config.max_retries; ++attempt) {
    Scene scene;
    scene.seed = seed;
    for (int k = 0; k < 3; ++k) scene.room[k] = Uniform(rng, config.room_min, config.room_max);
    scene.rt60 = Uniform(rng, config.rt60_min, config.rt60_max);
    const double margin = config.array_wall_fraction * scene.room.minCoeff() / 2;
    for (int k = 0; k < 3; ++k) {
      scene.array_position[k] = Uniform(rng, margin, scene.room[k] - margin);
    }
    const int count = std::uniform_int_distribution<int>(config.min_sources,
                                                         config.max_sources)(rng);
    bool placed_all = true;
    for (int s = 0; s < count && placed_all; ++s) {
      bool placed = false;
      for (int tries = 0; tries < 100 && !placed; ++tries) {
        Eigen::Vector3d pos;
        for (int k = 0; k < 3; ++k) {
          pos[k] = Uniform(rng, config.source_wall_min,
                           scene.room[k] - config.source_wall_min);
        }
        if ((pos - scene.array_position).norm() >= config.source_array_min) {
          scene.sources.push_back(SceneSource{pos, "", 0});
          placed = true;
        }
      }
      placed_all = placed;
    }
    if (placed_all && SatisfiesConfig(scene, config)) return scene;
  }
  Fail(ErrorCode::kConfigError, "scene constraints infeasible after " +
                                    std::to_string(config.max_retries) + " retries");
}

double Rt60ToAbsorption(double rt60, const Eigen::Vector3d& room) {
  Require(rt60 > 0, ErrorCode::kInvalidArgument, "rt60 must be positive");
  const double volume = room.prod();
  const double surface = 2 * (room.x() * room.y() + room.y() * room.z() + room.x() * room.z());
  return std::min(1.0, 0.161 * volume / (rt60 * surface));
}

int DefaultMaxOrder(const Scene& scene, double tail_factor) {
  const double radius = kSpeedOfSound * tail_factor * scene.rt60;
  int order = 0;
  for (int k = 0; k < 3; ++k) order += static_cast<int>(std::floor(radius / scene.room[k])) + 2;
  return order;
}

ImageSourceSet ComputeImageSources(const Scene& scene, int source_index,
                                   const ImageSourceOptions& options) {
  Require(source_index >= 0 && source_index < static_cast<int>(scene.sources.size()),
          ErrorCode::kInvalidArgument, "source index out of range");
  ImageSourceSet set;
  double max_delay = options.max_delay;
  if (options.max_order < 0) {
    set.max_order = DefaultMaxOrder(scene, options.tail_factor);
    max_delay = std::min(max_delay, options.tail_factor * scene.rt60);
  } else {
    set.max_order = options.max_order;
  }

  const Eigen::Vector3d& src = scene.sources[source_index].position;
  const double direct = (src - scene.array_position).norm();
  Require(direct > 0, ErrorCode::kInvalidArgument, "source coincides with the array");
  if (options.absorption) {
    const double alpha = std::clamp(*options.absorption, 0.0, 1.0);
    set.reflection = std::sqrt(1.0 - alpha);
  } else {
    set.reflection = std::exp(-0.5 * CalibratedLoss(scene, src, options.tail_factor));
  }

  ForEachImage(scene, src, set.max_order, max_delay,
               [&](const int* n, const int* parity, int order, const Eigen::Vector3d& pos,
                   double dist) {
                 const double reflection = order == 0 ? 1.0 : std::pow(set.reflection, order);
                 if (reflection <= 0.0) return;
                 ImageSource img;
                 img.position = pos;
                 img.doa = (pos - scene.array_position) / dist;
                 img.distance = dist;
                 img.delay = dist / kSpeedOfSound;
                 img.reflection_gain = reflection;
                 img.gain = reflection * direct / dist;
                 img.order = order;
                 for (int k = 0; k < 3; ++k) {
                   img.lattice[k] = n[k];
                   img.parity[k] = parity[k];
                 }
                 set.images.push_back(img);
               });
  std::stable_sort(set.images.begin(), set.images.end(),
                   [](const ImageSource& a, const ImageSource& b) {
                     if (a.order == 0 || b.order == 0) return a.order < b.order;
                     return a.delay < b.delay;
                   });
  if (set.images.size() > options.max_images) set.images.resize(options.max_images);
  return set;
}

double SchroederRt60(std::span<const double> rir, int sample_rate, double range_db) {
  Require(!rir.empty(), ErrorCode::kInvalidArgument, "empty impulse response");
  std::vector<double> energy(rir.size());
  for (std::size_t i = 0; i < rir.size(); ++i) energy[i] = rir[i] * rir[i];
  return DecayTime(energy, 1.0 / sample_rate, range_db);
}

}  // namespace ambix
