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

#include <algorithm>
#include <cmath>
#include <limits>

#include "ambix/error.h"

namespace ambix {
namespace {

constexpr double kLogFloor = 1e-12;

void CheckShapes(const Spectrogram& a, const Spectrogram& b) {
  Require(a.channels() == b.channels() && a.bins() == b.bins() &&
              a.frames() == b.frames(),
          ErrorCode::kShapeError, "metric inputs have mismatched shapes");
}

}  // namespace

double SiSdrUnclamped(std::span<const double> estimate,
                      std::span<const double> reference) {
  Require(estimate.size() == reference.size(), ErrorCode::kShapeError,
          "si_sdr inputs differ in length");
  double ref_energy = 0.0;
  double dot = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    ref_energy += reference[i] * reference[i];
    dot += estimate[i] * reference[i];
  }
  Require(ref_energy > 0.0, ErrorCode::kUndefinedReference,
          "si_sdr reference is all zeros");
  const double alpha = dot / ref_energy;
  double target = 0.0;
  double noise = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double s = alpha * reference[i];
    const double e = estimate[i] - s;
    target += s * s;
    noise += e * e;
  }
  if (noise == 0.0) return std::numeric_limits<double>::infinity();
  if (target == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(target / noise);
}

double SiSdr(std::span<const double> estimate, std::span<const double> reference) {
  return std::clamp(SiSdrUnclamped(estimate, reference), -kSiSdrClampDb, kSiSdrClampDb);
}

SiSdrResult SiSdr(const AudioBuffer& estimate, const AudioBuffer& reference) {
  Require(estimate.num_channels() == reference.num_channels() &&
              estimate.num_channels() > 0,
          ErrorCode::kShapeError, "si_sdr channel count mismatch");
  SiSdrResult result;
  for (std::size_t c = 0; c < reference.num_channels(); ++c) {
    result.per_channel.push_back(SiSdr(estimate.channels[c], reference.channels[c]));
  }
  double sum = 0.0;
  for (double v : result.per_channel) sum += v;
  result.mean = sum / static_cast<double>(result.per_channel.size());
  return result;
}

double Coherence(const Spectrogram& estimate, const Spectrogram& reference) {
  CheckShapes(estimate, reference);
  double sum = 0.0;
  long count = 0;
  for (int c = 0; c < reference.channels(); ++c) {
    for (int f = 0; f < reference.bins(); ++f) {
      Complex cross = 0.0;
      double pe = 0.0;
      double pr = 0.0;
      for (int t = 0; t < reference.frames(); ++t) {
        const Complex e = estimate.at(c, f, t);
        const Complex r = reference.at(c, f, t);
        cross += e * std::conj(r);
        pe += std::norm(e);
        pr += std::norm(r);
      }
      if (pe <= 0.0 || pr <= 0.0) continue;
      sum += std::min(1.0, std::norm(cross) / (pe * pr));
      ++count;
    }
  }
  return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

std::vector<double> MagnitudeErrorByBin(const Spectrogram& estimate,
                                        const Spectrogram& reference) {
  CheckShapes(estimate, reference);
  std::vector<double> by_bin(reference.bins(), 0.0);
  for (int c = 0; c < reference.channels(); ++c) {
    for (int f = 0; f < reference.bins(); ++f) {
      double pe = 0.0;
      double pr = 0.0;
      for (int t = 0; t < reference.frames(); ++t) {
        pe += std::norm(estimate.at(c, f, t));
        pr += std::norm(reference.at(c, f, t));
      }
      const double ratio = (std::sqrt(pe) + kLogFloor) / (std::sqrt(pr) + kLogFloor);
      by_bin[f] += std::abs(20.0 * std::log10(ratio));
    }
  }
  for (double& v : by_bin) v /= reference.channels();
  return by_bin;
}

double MagnitudeSpectrumError(const Spectrogram& estimate,
                              const Spectrogram& reference) {
  const auto by_bin = MagnitudeErrorByBin(estimate, reference);
  double sum = 0.0;
  for (double v : by_bin) sum += v;
  return sum / static_cast<double>(by_bin.size());
}

MetricsReport ComputeMetrics(const AudioBuffer& estimate, const AudioBuffer& reference,
                             const StftParams& params) {
  MetricsReport report;
  report.si_sdr = SiSdr(estimate, reference);
  const Spectrogram se = Stft(estimate, params);
  const Spectrogram sr = Stft(reference, params);
  report.coherence = Coherence(se, sr);
  report.ms_err = MagnitudeSpectrumError(se, sr);
  return report;
}

}  // namespace ambix
