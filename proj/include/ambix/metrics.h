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

#ifndef AMBIX_METRICS_H_
#define AMBIX_METRICS_H_

#include <span>
#include <vector>

#include "ambix/dsp.h"

namespace ambix {

inline constexpr double kSiSdrClampDb = 60.0;

// Scale-invariant SDR in dB, clamped to [-60, 60]. Throws
// kUndefinedReference when the reference is all zeros.
double SiSdr(std::span<const double> estimate, std::span<const double> reference);
// Unclamped variant; may return +/-inf.
double SiSdrUnclamped(std::span<const double> estimate,
                      std::span<const double> reference);

struct SiSdrResult {
  std::vector<double> per_channel;
  double mean = 0.0;
};
SiSdrResult SiSdr(const AudioBuffer& estimate, const AudioBuffer& reference);

// Mean magnitude-squared coherence over channels and bins. Bins where either
// side has zero energy are excluded.
double Coherence(const Spectrogram& estimate, const Spectrogram& reference);

// Mean absolute log-magnitude-spectrum difference in dB over channels and bins.
double MagnitudeSpectrumError(const Spectrogram& estimate,
                              const Spectrogram& reference);

// Per-bin magnitude error averaged over channels (length = bins).
std::vector<double> MagnitudeErrorByBin(const Spectrogram& estimate,
                                        const Spectrogram& reference);

struct MetricsReport {
  SiSdrResult si_sdr;
  double coherence = 0.0;
  double ms_err = 0.0;
};

MetricsReport ComputeMetrics(const AudioBuffer& estimate, const AudioBuffer& reference,
                             const StftParams& params);

}  // namespace ambix

#endif  // AMBIX_METRICS_H_
