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

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "ambix/container.h"
#include "ambix/dsp.h"
#include "ambix/error.h"

namespace ambix {
namespace {

MicArrayGeometry TestArray() {
  return MicArrayGeometry{{{0.03, -0.02, 0.01}, {-0.05, 0.04, 0.0},
                           {0.0, 0.0, 0.0}, {0.06, 0.05, -0.07}}};
}

std::string TempPath(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("ambix_atf_" + name)).string();
}

TEST(FreefieldAtfTest, TrivialCases) {
  const Eigen::Vector3d u(0.6, 0.0, 0.8);
  EXPECT_EQ(FreefieldAtf(0.0, u, {0.1, 0.2, 0.3}), std::complex<double>(1.0, 0.0));
  EXPECT_EQ(FreefieldAtf(4321.0, u, Eigen::Vector3d::Zero()), std::complex<double>(1.0, 0.0));
}

TEST(FreefieldAtfTest, KnownPhase) {
  const auto h = FreefieldAtf(1000.0, {1, 0, 0}, {0.1, 0, 0});
  EXPECT_NEAR(h.real(), -0.2581, 1e-4);
  EXPECT_NEAR(h.imag(), 0.9661, 1e-4);
  const double phase = 2 * std::numbers::pi * 100.0 / 343.0;
  EXPECT_NEAR(h.real(), std::cos(phase), 1e-12);
  EXPECT_NEAR(h.imag(), std::sin(phase), 1e-12);
}

TEST(FreefieldAtfSetTest, UnitModulusAndOriginRow) {
  const auto grid = FibonacciGrid(60);
  const auto set = FreefieldAtfSet(TestArray(), grid, 65, 24000);
  EXPECT_EQ(set.mics(), 4);
  EXPECT_EQ(set.directions(), 60);
  for (int p = 0; p < 4; ++p) {
    for (int d = 0; d < 60; ++d) {
      for (int f = 0; f < 65; ++f) {
        const auto v = std::complex<double>(set.at(p, d, f));
        EXPECT_NEAR(std::abs(v), 1.0, 1e-6);
        if (p == 2) EXPECT_EQ(v, std::complex<double>(1.0, 0.0));
      }
    }
  }
}

TEST(FreefieldAtfSetTest, MatchesPointwiseDefinition) {
  const auto grid = FibonacciGrid(30);
  const auto geom = TestArray();
  const auto set = FreefieldAtfSet(geom, grid, 129, 24000);
  for (int p = 0; p < 4; ++p) {
    for (int d = 0; d < 30; ++d) {
      for (int f = 0; f < 129; f += 7) {
        const double freq = f * 24000.0 / 256.0;
        const auto expected = FreefieldAtf(freq, grid[d].ToUnit(), geom.positions[p]);
        EXPECT_NEAR(std::abs(std::complex<double>(set.at(p, d, f)) - expected), 0.0, 1e-6);
      }
    }
  }
}

TEST(FreefieldAtfSetTest, RejectsInvalidBinCount) {
  const auto grid = FibonacciGrid(20);
  for (int bins : {0, 1, 64, 66, 100}) {
    try {
      FreefieldAtfSet(TestArray(), grid, bins, 24000);
      FAIL() << "accepted bins=" << bins;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
    }
  }
}

// The IR from an inverse real FFT must be real: compare against a full
// complex inverse DFT built from the Hermitian extension.
TEST(FreefieldAtfSetTest, ImpulseResponseIsReal) {
  const auto grid = FibonacciGrid(20);
  const auto set = FreefieldAtfSet(TestArray(), grid, 65, 24000);
  const int n = set.IrLength();
  for (int p = 0; p < 4; ++p) {
    for (int d = 0; d < 20; d += 3) {
      std::vector<std::complex<double>> full(n);
      for (int k = 0; k < n; ++k) {
        full[k] = k <= n / 2 ? std::complex<double>(set.at(p, d, k))
                             : std::conj(std::complex<double>(set.at(p, d, n - k)));
      }
      // Nyquist must be real for the Hermitian extension to be consistent.
      full[n / 2] = full[n / 2].real();
      const auto ir = set.ShiftedIr(p, d);
      ASSERT_EQ(static_cast<int>(ir.size()), n);
      for (int t = 0; t < n; ++t) {
        std::complex<double> acc = 0.0;
        for (int k = 0; k < n; ++k) {
          acc += full[k] * std::polar(1.0, 2 * std::numbers::pi * k * t / n);
        }
        acc /= n;
        EXPECT_LT(std::abs(acc.imag()), 1e-12);
        EXPECT_NEAR(ir[(t + n / 2) % n], acc.real(), 1e-9);
      }
    }
  }
}

// After the half-length shift the IR energy sits after the modeling delay
// minus the largest possible acoustic lead (0.09*sqrt(3) m at most).
TEST(FreefieldAtfSetTest, ShiftedIrIsEssentiallyCausal) {
  const auto grid = FibonacciGrid(120);
  const auto set = FreefieldAtfSet(TestArray(), grid, 65, 24000);
  const int n = set.IrLength();
  for (int p = 0; p < 4; ++p) {
    for (int d = 0; d < 120; ++d) {
      const auto ir = set.ShiftedIr(p, d);
      double pre = 0.0, total = 0.0;
      for (int t = 0; t < n; ++t) {
        total += ir[t] * ir[t];
        if (t < n / 4) pre += ir[t] * ir[t];
      }
      EXPECT_LT(pre / total, 0.01) << "p=" << p << " d=" << d;
    }
  }
}

TEST(AtfFileTest, RoundTripIsBitExact) {
  const auto set = FreefieldAtfSet(TestArray(), FibonacciGrid(40), 65, 24000);
  const auto path = TempPath("roundtrip.atf");
  SaveAtfSet(set, path);
  const auto loaded = LoadAtfSet(path);
  EXPECT_EQ(loaded.mics(), 4);
  EXPECT_EQ(loaded.directions(), 40);
  EXPECT_EQ(loaded.bins(), 65);
  EXPECT_EQ(loaded.sample_rate(), 24000);
  ASSERT_EQ(loaded.values().size(), set.values().size());
  EXPECT_EQ(0, std::memcmp(loaded.values().data(), set.values().data(),
                           set.values().size() * sizeof(std::complex<float>)));
  for (std::size_t d = 0; d < 40; ++d) {
    EXPECT_EQ(loaded.grid()[d].azimuth, set.grid()[d].azimuth);
    EXPECT_EQ(loaded.grid()[d].colatitude, set.grid()[d].colatitude);
    EXPECT_EQ(loaded.grid().weights()[d], set.grid().weights()[d]);
  }
  EXPECT_EQ(loaded.Hash(), set.Hash());

  const auto path2 = TempPath("roundtrip2.atf");
  SaveAtfSet(loaded, path2);
  std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(a)), {});
  const std::string sb((std::istreambuf_iterator<char>(b)), {});
  EXPECT_EQ(sa, sb);
  std::filesystem::remove(path);
  std::filesystem::remove(path2);
}

TEST(AtfFileTest, TruncatedFileIsFormatError) {
  const auto set = FreefieldAtfSet(TestArray(), FibonacciGrid(20), 65, 24000);
  const auto path = TempPath("truncated.atf");
  SaveAtfSet(set, path);
  const auto size = std::filesystem::file_size(path);
  for (auto keep : {std::uintmax_t{3}, std::uintmax_t{10}, size / 2, size - 4}) {
    std::filesystem::resize_file(path, keep);
    try {
      LoadAtfSet(path);
      FAIL() << "accepted truncation to " << keep;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kFormatError);
    }
    SaveAtfSet(set, path);
  }
  std::filesystem::remove(path);
}

TEST(AtfFileTest, GridLengthMismatchIsFormatError) {
  const auto set = FreefieldAtfSet(TestArray(), FibonacciGrid(20), 65, 24000);
  const auto path = TempPath("mismatch.atf");
  SaveAtfSet(set, path);
  auto c = ReadContainer(path, "ATF1");
  c.header["D"] = 21;
  WriteContainer(path, "ATF1", c.header, c.payload);
  try {
    LoadAtfSet(path);
    FAIL() << "accepted D != grid length";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFormatError);
  }
  std::filesystem::remove(path);
}

TEST(AtfFileTest, MissingFileIsIoError) {
  try {
    LoadAtfSet(TempPath("does_not_exist.atf"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoError);
  }
}

}  // namespace
}  // namespace ambix
