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

#include "ambix/spatial.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "ambix/error.h"

namespace ambix {
namespace {

constexpr double kPi = std::numbers::pi;

double WrapAzimuth(double az) {
  double wrapped = std::fmod(az, 2 * kPi);
  if (wrapped < 0) wrapped += 2 * kPi;
  if (wrapped >= 2 * kPi) wrapped = 0.0;
  return wrapped;
}

double Factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Associated Legendre P_n^m(x) for m >= 0 without the Condon-Shortley phase.
double Legendre(int n, int m, double x) {
  const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
  double pmm = 1.0;
  for (int i = 1; i <= m; ++i) pmm *= (2 * i - 1) * s;
  if (n == m) return pmm;
  double pmm1 = x * (2 * m + 1) * pmm;
  if (n == m + 1) return pmm1;
  double pnm = 0.0;
  for (int l = m + 2; l <= n; ++l) {
    pnm = ((2 * l - 1) * x * pmm1 - (l + m - 1) * pmm) / (l - m);
    pmm = pmm1;
    pmm1 = pnm;
  }
  return pnm;
}

}  // namespace

Direction Direction::FromColatitude(double azimuth, double colatitude) {
  Require(colatitude >= 0.0 && colatitude <= kPi, ErrorCode::kInvalidArgument,
          "colatitude outside [0, pi]");
  return Direction{WrapAzimuth(azimuth), colatitude};
}

Direction Direction::FromElevation(double azimuth, double elevation) {
  return FromColatitude(azimuth, kPi / 2 - elevation);
}

Direction Direction::FromUnit(const Eigen::Vector3d& u) {
  const double norm = u.norm();
  Require(norm > 0.0, ErrorCode::kInvalidArgument, "zero vector has no direction");
  const double z = std::clamp(u.z() / norm, -1.0, 1.0);
  return Direction{WrapAzimuth(std::atan2(u.y(), u.x())), std::acos(z)};
}

Eigen::Vector3d Direction::ToUnit() const {
  const double s = std::sin(colatitude);
  return {s * std::cos(azimuth), s * std::sin(azimuth), std::cos(colatitude)};
}

double AngularDistance(const Direction& a, const Direction& b) {
  const Eigen::Vector3d ua = a.ToUnit();
  const Eigen::Vector3d ub = b.ToUnit();
  // atan2 form stays accurate for nearly identical directions.
  return std::atan2(ua.cross(ub).norm(), ua.dot(ub));
}

DirectionGrid::DirectionGrid(std::vector<Direction> directions,
                             std::vector<double> weights)
    : directions_(std::move(directions)), weights_(std::move(weights)) {
  Require(!directions_.empty(), ErrorCode::kInvalidArgument, "empty direction grid");
  Require(directions_.size() == weights_.size(), ErrorCode::kInvalidArgument,
          "grid weight count does not match direction count");
  double total = 0.0;
  for (double w : weights_) {
    Require(w >= 0.0 && std::isfinite(w), ErrorCode::kInvalidArgument,
            "grid weights must be finite and nonnegative");
    total += w;
  }
  Require(std::abs(total - 4 * kPi) <= 1e-6, ErrorCode::kInvalidArgument,
          "grid weights sum to " + std::to_string(total) + ", expected 4*pi");
  units_.reserve(directions_.size());
  for (const auto& d : directions_) units_.push_back(d.ToUnit());
  for (std::size_t i = 0; i < units_.size(); ++i) {
    for (std::size_t j = i + 1; j < units_.size(); ++j) {
      const double angle = std::atan2(units_[i].cross(units_[j]).norm(),
                                      units_[i].dot(units_[j]));
      Require(angle > 1e-9, ErrorCode::kInvalidArgument,
              "duplicate grid directions " + std::to_string(i) + " and " +
                  std::to_string(j));
    }
  }
}

std::size_t DirectionGrid::Nearest(const Eigen::Vector3d& u) const {
  const Eigen::Vector3d n = u.normalized();
  std::size_t best = 0;
  double best_dot = -2.0;
  for (std::size_t i = 0; i < units_.size(); ++i) {
    const double d = units_[i].dot(n);
    if (d > best_dot) {
      best_dot = d;
      best = i;
    }
  }
  return best;
}

DirectionGrid FibonacciGrid(int count) {
  Require(count >= 4, ErrorCode::kInvalidArgument,
          "fibonacci grid needs at least 4 directions, got " + std::to_string(count));
  const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
  std::vector<Direction> dirs;
  dirs.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / count;
    dirs.push_back(Direction{WrapAzimuth(golden_angle * i), std::acos(z)});
  }
  return DirectionGrid(std::move(dirs),
                       std::vector<double>(count, 4 * kPi / count));
}

std::vector<double> ShVector(const Direction& dir, int order) {
  Require(order >= 0 && order <= kMaxShOrder, ErrorCode::kUnsupportedOrder,
          "spherical harmonic order " + std::to_string(order) + " not in [0, 3]");
  std::vector<double> out(ShChannelCount(order));
  const double x = std::cos(dir.colatitude);
  for (int n = 0; n <= order; ++n) {
    for (int m = -n; m <= n; ++m) {
      const int am = std::abs(m);
      double norm = std::sqrt((2 * n + 1) / (4 * kPi) * Factorial(n - am) /
                              Factorial(n + am));
      if (m != 0) norm *= std::sqrt(2.0);
      const double p = Legendre(n, am, x);
      double angular = 1.0;
      if (m > 0) angular = std::cos(am * dir.azimuth);
      if (m < 0) angular = std::sin(am * dir.azimuth);
      out[Acn(n, m)] = norm * p * angular;
    }
  }
  return out;
}

ShMatrix ComputeShMatrix(const DirectionGrid& grid, int order) {
  ShMatrix sh;
  sh.order = order;
  sh.values.resize(static_cast<Eigen::Index>(grid.size()), ShChannelCount(order));
  for (std::size_t d = 0; d < grid.size(); ++d) {
    const auto y = ShVector(grid[d], order);
    for (int l = 0; l < ShChannelCount(order); ++l) sh.values(d, l) = y[l];
  }
  return sh;
}

}  // namespace ambix
