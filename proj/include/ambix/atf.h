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

#ifndef AMBIX_ATF_H_
#define AMBIX_ATF_H_

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ambix/spatial.h"
#include "nlohmann/json.hpp"

namespace ambix {

struct MicArrayGeometry {
  std::vector<Eigen::Vector3d> positions;  // metres, relative to array centre
  int size() const { return static_cast<int>(positions.size()); }
};

// Plane-wave phase e^{j 2 pi f u.r / c} of a microphone at r for a wave
// arriving from direction u.
std::complex<double> FreefieldAtf(double frequency, const Eigen::Vector3d& doa,
                                  const Eigen::Vector3d& mic);

// Directional array transfer functions on a grid: mics x directions x bins.
// Values are held in single precision, matching the on-disk format, so a
// save/load round trip is exact.
class AtfSet {
 public:
  AtfSet(int mics, DirectionGrid grid, int bins, int sample_rate);

  int mics() const { return mics_; }
  int directions() const { return static_cast<int>(grid_.size()); }
  int bins() const { return bins_; }
  int sample_rate() const { return sample_rate_; }
  const DirectionGrid& grid() const { return grid_; }

  // Centre frequency of bin f in Hz.
  double Frequency(int f) const {
    return f * static_cast<double>(sample_rate_) / (2.0 * (bins_ - 1));
  }
  // Length of the time-domain IR implied by the bin count.
  int IrLength() const { return 2 * (bins_ - 1); }

  std::complex<float>& at(int p, int d, int f) {
    return values_[(static_cast<std::size_t>(p) * directions() + d) * bins_ + f];
  }
  const std::complex<float>& at(int p, int d, int f) const {
    return values_[(static_cast<std::size_t>(p) * directions() + d) * bins_ + f];
  }
  const std::vector<std::complex<float>>& values() const { return values_; }
  std::vector<std::complex<float>>& values() { return values_; }

  // P x D matrix at bin f.
  Eigen::MatrixXcd BinMatrix(int f) const;

  // Time-domain IR of (p, d), circularly shifted by IrLength()/2 so that
  // negative path differences stay causal.
  std::vector<double> ShiftedIr(int p, int d) const;

  // FNV-1a hash of the payload, used to tie derived artifacts to this set.
  std::string Hash() const;

 private:
  int mics_;
  DirectionGrid grid_;
  int bins_;
  int sample_rate_;
  std::vector<std::complex<float>> values_;
};

// bins must be 2^k/2 + 1.
AtfSet FreefieldAtfSet(const MicArrayGeometry& geometry, const DirectionGrid& grid,
                       int bins, int sample_rate);

// "ATF1" container: JSON header with P, D, F_H, sample_rate and the grid,
// then interleaved (re, im) float32 in p-major, d, f-minor order.
void SaveAtfSet(const AtfSet& set, const std::string& path);
AtfSet LoadAtfSet(const std::string& path);

// Shared by the ATF and encoder containers.
nlohmann::json GridToJson(const DirectionGrid& grid);
DirectionGrid GridFromJson(const nlohmann::json& j);

}  // namespace ambix

#endif  // AMBIX_ATF_H_
