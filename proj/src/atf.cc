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

#include "ambix/atf.h"

#include <cmath>
#include <cstring>
#include <numbers>
#include <string>

#include "ambix/container.h"
#include "ambix/dsp.h"
#include "ambix/error.h"

namespace ambix {
namespace {

constexpr int kAtfVersion = 1;

bool IsRealFftBinCount(int bins) {
  if (bins < 2) return false;
  const int n = bins - 1;
  return (n & (n - 1)) == 0;
}

}  // namespace

std::complex<double> FreefieldAtf(double frequency, const Eigen::Vector3d& doa,
                                  const Eigen::Vector3d& mic) {
  return std::polar(1.0, 2.0 * std::numbers::pi * frequency * doa.dot(mic) / kSpeedOfSound);
}

AtfSet::AtfSet(int mics, DirectionGrid grid, int bins, int sample_rate)
    : mics_(mics), grid_(std::move(grid)), bins_(bins), sample_rate_(sample_rate) {
  Require(mics >= 1, ErrorCode::kInvalidArgument, "ATF set needs at least one mic");
  Require(IsRealFftBinCount(bins), ErrorCode::kInvalidArgument,
          "ATF bin count " + std::to_string(bins) + " is not 2^k/2+1");
  Require(sample_rate > 0, ErrorCode::kInvalidArgument, "sample rate must be positive");
  values_.assign(static_cast<std::size_t>(mics) * grid_.size() * bins, {0.0f, 0.0f});
}

Eigen::MatrixXcd AtfSet::BinMatrix(int f) const {
  Eigen::MatrixXcd h(mics_, directions());
  for (int p = 0; p < mics_; ++p) {
    for (int d = 0; d < directions(); ++d) {
      const auto v = at(p, d, f);
      h(p, d) = {v.real(), v.imag()};
    }
  }
  return h;
}

std::vector<double> AtfSet::ShiftedIr(int p, int d) const {
  const RealFft fft(IrLength());
  std::vector<Complex> spec(bins_);
  for (int f = 0; f < bins_; ++f) {
    const auto v = at(p, d, f);
    spec[f] = {v.real(), v.imag()};
  }
  std::vector<double> ir(IrLength());
  fft.Inverse(spec, ir);
  const int half = IrLength() / 2;
  std::vector<double> shifted(IrLength());
  for (int n = 0; n < IrLength(); ++n) shifted[(n + half) % IrLength()] = ir[n];
  return shifted;
}

std::string AtfSet::Hash() const {
  return HashFloats({reinterpret_cast<const float*>(values_.data()), values_.size() * 2});
}

AtfSet FreefieldAtfSet(const MicArrayGeometry& geometry, const DirectionGrid& grid,
                       int bins, int sample_rate) {
  AtfSet set(geometry.size(), grid, bins, sample_rate);
  for (int p = 0; p < geometry.size(); ++p) {
    for (int d = 0; d < set.directions(); ++d) {
      const Eigen::Vector3d u = grid[d].ToUnit();
      for (int f = 0; f < bins; ++f) {
        const auto h = FreefieldAtf(set.Frequency(f), u, geometry.positions[p]);
        set.at(p, d, f) = {static_cast<float>(h.real()), static_cast<float>(h.imag())};
      }
    }
  }
  return set;
}

nlohmann::json GridToJson(const DirectionGrid& grid) {
  nlohmann::json az = nlohmann::json::array();
  nlohmann::json col = nlohmann::json::array();
  for (const auto& d : grid.directions()) {
    az.push_back(d.azimuth);
    col.push_back(d.colatitude);
  }
  return {{"azimuth", az}, {"colatitude", col}, {"weights", grid.weights()}};
}

DirectionGrid GridFromJson(const nlohmann::json& j) {
  const auto az = j.at("azimuth").get<std::vector<double>>();
  const auto col = j.at("colatitude").get<std::vector<double>>();
  auto weights = j.at("weights").get<std::vector<double>>();
  Require(az.size() == col.size() && az.size() == weights.size(),
          ErrorCode::kFormatError, "grid arrays differ in length");
  std::vector<Direction> dirs;
  dirs.reserve(az.size());
  for (std::size_t i = 0; i < az.size(); ++i) dirs.push_back(Direction{az[i], col[i]});
  return DirectionGrid(std::move(dirs), std::move(weights));
}

void SaveAtfSet(const AtfSet& set, const std::string& path) {
  const nlohmann::json header = {
      {"version", kAtfVersion},
      {"P", set.mics()},
      {"D", set.directions()},
      {"F_H", set.bins()},
      {"sample_rate", set.sample_rate()},
      {"grid", GridToJson(set.grid())},
  };
  const auto& v = set.values();
  WriteContainer(path, "ATF1", header,
                 {reinterpret_cast<const float*>(v.data()), v.size() * 2});
}

AtfSet LoadAtfSet(const std::string& path) {
  Container c = ReadContainer(path, "ATF1");
  try {
    const auto& h = c.header;
    Require(h.at("version").get<int>() == kAtfVersion, ErrorCode::kFormatError,
            path + ": unsupported ATF version");
    const int p = h.at("P").get<int>();
    const int d = h.at("D").get<int>();
    const int bins = h.at("F_H").get<int>();
    DirectionGrid grid = GridFromJson(h.at("grid"));
    Require(static_cast<int>(grid.size()) == d, ErrorCode::kFormatError,
            path + ": D=" + std::to_string(d) + " does not match grid length " +
                std::to_string(grid.size()));
    AtfSet set(p, std::move(grid), bins, h.at("sample_rate").get<int>());
    Require(c.payload.size() == set.values().size() * 2, ErrorCode::kFormatError,
            path + ": payload size does not match declared dimensions");
    std::memcpy(static_cast<void*>(set.values().data()), c.payload.data(), c.payload.size() * sizeof(float));
    for (const auto& v : set.values()) {
      Require(std::isfinite(v.real()) && std::isfinite(v.imag()), ErrorCode::kFormatError,
              path + ": non-finite ATF value");
    }
    return set;
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kFormatError, path + ": malformed header: " + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidArgument) Fail(ErrorCode::kFormatError, e.what());
    throw;
  }
}

}  // namespace ambix
