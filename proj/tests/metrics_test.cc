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

#include "ambix/metrics.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ambix/error.h"

namespace ambix {
namespace {

std::vector<double> Gaussian(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

Spectrogram RandomSpec(int channels, int frames, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  Spectrogram s(channels, frames, StftParams{});
  for (auto& v : s.data()) v = Complex(d(rng), d(rng));
  return s;
}

TEST(SiSdrTest, ScaleInvarianceHitsClamp) {
  std::mt19937_64 rng(1);
  const auto ref = Gaussian(500, rng);
  std::vector<double> est(ref);
  for (double& v : est) v *= 3.0;
  EXPECT_DOUBLE_EQ(SiSdr(est, ref), 60.0);
}

TEST(SiSdrTest, HandCaseIsZeroDb) {
  const std::vector<double> ref = {1.0, 0.0};
  const std::vector<double> est = {1.0, 1.0};
  EXPECT_NEAR(SiSdr(est, ref), 0.0, 1e-12);
}

TEST(SiSdrTest, OrthogonalHitsLowerClamp) {
  const std::vector<double> ref = {1.0, 0.0};
  const std::vector<double> est = {0.0, 1.0};
  EXPECT_DOUBLE_EQ(SiSdr(est, ref), -60.0);
}

TEST(SiSdrTest, ZeroReferenceIsUndefined) {
  const std::vector<double> ref = {0.0, 0.0};
  const std::vector<double> est = {1.0, 1.0};
  try {
    SiSdr(est, ref);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUndefinedReference);
  }
}

TEST(SiSdrTest, ScaleInvariantBeforeClamp) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto ref = Gaussian(300, rng);
    auto est = Gaussian(300, rng);
    for (std::size_t i = 0; i < est.size(); ++i) est[i] += ref[i];
    const double base = SiSdrUnclamped(est, ref);
    for (double a : {-2.5, 0.01, 7.0}) {
      std::vector<double> scaled(est);
      for (double& v : scaled) v *= a;
      EXPECT_NEAR(SiSdrUnclamped(scaled, ref), base, 1e-9);
    }
  }
}

TEST(SiSdrTest, MultichannelIsChannelMean) {
  AudioBuffer ref(2, 2, 24000), est(2, 2, 24000);
  ref.channels = {{1.0, 0.0}, {1.0, 0.0}};
  est.channels = {{1.0, 1.0}, {2.0, 0.0}};
  const auto r = SiSdr(est, ref);
  EXPECT_NEAR(r.per_channel[0], 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(r.per_channel[1], 60.0);
  EXPECT_NEAR(r.mean, 30.0, 1e-12);
}

TEST(CoherenceTest, SelfAndPhaseRotation) {
  std::mt19937_64 rng(3);
  const Spectrogram ref = RandomSpec(2, 30, rng);
  EXPECT_NEAR(Coherence(ref, ref), 1.0, 1e-12);
  Spectrogram rotated = ref;
  for (auto& v : rotated.data()) v *= std::polar(1.0, 0.77);
  EXPECT_NEAR(Coherence(rotated, ref), 1.0, 1e-12);
}

TEST(CoherenceTest, InvariantToPerChannelComplexScaling) {
  std::mt19937_64 rng(4);
  const Spectrogram ref = RandomSpec(3, 25, rng);
  Spectrogram est = RandomSpec(3, 25, rng);
  for (std::size_t i = 0; i < est.data().size(); ++i) est.data()[i] += ref.data()[i];
  const double base = Coherence(est, ref);
  Spectrogram scaled = est;
  const Complex gains[3] = {{2.0, 1.0}, {-0.3, 0.0}, {0.0, 5.0}};
  for (int c = 0; c < 3; ++c) {
    for (int f = 0; f < scaled.bins(); ++f) {
      for (int t = 0; t < scaled.frames(); ++t) scaled.at(c, f, t) *= gains[c];
    }
  }
  EXPECT_NEAR(Coherence(scaled, ref), base, 1e-12);
}

TEST(CoherenceTest, IndependentNoiseIsIncoherent) {
  // Monte-Carlo: expected MSC of independent complex Gaussians is 1/T.
  std::mt19937_64 rng(5);
  double total = 0.0;
  const int trials = 100;
  for (int i = 0; i < trials; ++i) {
    const Spectrogram a = RandomSpec(1, 400, rng);
    const Spectrogram b = RandomSpec(1, 400, rng);
    const double c = Coherence(a, b);
    EXPECT_GE(c, 0.0);
    EXPECT_LE(c, 1.0);
    total += c;
  }
  EXPECT_LT(total / trials, 0.05);
}

TEST(CoherenceTest, ZeroEnergyBinsExcluded) {
  std::mt19937_64 rng(6);
  Spectrogram ref = RandomSpec(1, 10, rng);
  for (int t = 0; t < 10; ++t) ref.at(0, 5, t) = 0.0;
  EXPECT_NEAR(Coherence(ref, ref), 1.0, 1e-12);
}

TEST(MagnitudeErrorTest, IdentityAndGain) {
  std::mt19937_64 rng(7);
  const Spectrogram ref = RandomSpec(2, 12, rng);
  EXPECT_NEAR(MagnitudeSpectrumError(ref, ref), 0.0, 1e-12);
  Spectrogram doubled = ref;
  for (auto& v : doubled.data()) v *= 2.0;
  EXPECT_NEAR(MagnitudeSpectrumError(doubled, ref), 20 * std::log10(2.0), 1e-9);
}

TEST(MagnitudeErrorTest, MatchesDirectFormula) {
  std::mt19937_64 rng(8);
  const Spectrogram ref = RandomSpec(3, 17, rng);
  const Spectrogram est = RandomSpec(3, 17, rng);
  double sum = 0.0;
  for (int c = 0; c < 3; ++c) {
    for (int f = 0; f < ref.bins(); ++f) {
      double a = 0.0, b = 0.0;
      for (int t = 0; t < 17; ++t) {
        a += std::norm(est.at(c, f, t));
        b += std::norm(ref.at(c, f, t));
      }
      sum += std::abs(10 * std::log10(a) - 10 * std::log10(b));
    }
  }
  EXPECT_NEAR(MagnitudeSpectrumError(est, ref), sum / (3 * ref.bins()), 1e-9);
}

TEST(MetricsTest, PermutationEquivariantOverChannels) {
  std::mt19937_64 rng(9);
  AudioBuffer ref(3, 4000, 24000), est(3, 4000, 24000);
  for (int c = 0; c < 3; ++c) {
    ref.channels[c] = Gaussian(4000, rng);
    est.channels[c] = Gaussian(4000, rng);
    for (int n = 0; n < 4000; ++n) est.channels[c][n] += (c + 1) * ref.channels[c][n];
  }
  const auto base = ComputeMetrics(est, ref, StftParams{});
  AudioBuffer ref_p = ref, est_p = est;
  std::swap(ref_p.channels[0], ref_p.channels[2]);
  std::swap(est_p.channels[0], est_p.channels[2]);
  const auto permuted = ComputeMetrics(est_p, ref_p, StftParams{});
  EXPECT_NEAR(permuted.si_sdr.mean, base.si_sdr.mean, 1e-9);
  EXPECT_NEAR(permuted.si_sdr.per_channel[0], base.si_sdr.per_channel[2], 1e-12);
  EXPECT_NEAR(permuted.coherence, base.coherence, 1e-12);
  EXPECT_NEAR(permuted.ms_err, base.ms_err, 1e-12);
}

}  // namespace
}  // namespace ambix
