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

#ifndef AMBIX_SPATIAL_H_
#define AMBIX_SPATIAL_H_

#include <array>
#include <cstddef>
#include <numbers>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace ambix {

inline constexpr double kSpeedOfSound = 343.0;
inline constexpr int kMaxShOrder = 3;

// A direction on the unit sphere. Angles are stored as azimuth and
// colatitude (angle from +z); elevation-based constructors convert.
struct Direction {
  double azimuth = 0.0;     // [0, 2*pi)
  double colatitude = 0.0;  // [0, pi]

  static Direction FromColatitude(double azimuth, double colatitude);
  static Direction FromElevation(double azimuth, double elevation);
  static Direction FromUnit(const Eigen::Vector3d& u);

  double elevation() const { return std::numbers::pi / 2 - colatitude; }
  Eigen::Vector3d ToUnit() const;
};

// Great-circle angle between two directions, in radians.
double AngularDistance(const Direction& a, const Direction& b);

class DirectionGrid {
 public:
  // Validates: weights nonnegative and summing to 4*pi, no duplicates.
  DirectionGrid(std::vector<Direction> directions, std::vector<double> weights);

  std::size_t size() const { return directions_.size(); }
  const std::vector<Direction>& directions() const { return directions_; }
  const std::vector<double>& weights() const { return weights_; }
  const Direction& operator[](std::size_t i) const { return directions_[i]; }

  // Index of the grid direction with the smallest angular distance to u.
  std::size_t Nearest(const Eigen::Vector3d& u) const;

 private:
  std::vector<Direction> directions_;
  std::vector<double> weights_;
  std::vector<Eigen::Vector3d> units_;
};

// Fibonacci-spiral grid with uniform weights 4*pi/count. Deterministic.
DirectionGrid FibonacciGrid(int count);

inline constexpr int ShChannelCount(int order) { return (order + 1) * (order + 1); }

// ACN index of degree n, order m.
inline constexpr int Acn(int n, int m) { return n * n + n + m; }

// Real spherical harmonics, ACN ordering, orthonormal (N3D with the 1/sqrt(4pi)
// factor, so Y00 = 0.28209), no Condon-Shortley phase.
std::vector<double> ShVector(const Direction& dir, int order);

struct ShMatrix {
  Eigen::MatrixXd values;  // D x (N+1)^2
  int order = 0;
  static constexpr const char* kConvention = "ACN/N3D";
};

ShMatrix ComputeShMatrix(const DirectionGrid& grid, int order);

// Gain that converts an N3D channel of degree n to SN3D: 1/sqrt(2n+1).
inline constexpr std::array<double, kMaxShOrder + 1> kN3dToSn3d = {
    1.0, 0.57735026918962573, 0.44721359549995793, 0.37796447300922720};

}  // namespace ambix

#endif  // AMBIX_SPATIAL_H_
