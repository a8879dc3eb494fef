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

#ifndef AMBIX_ENCODERS_H_
#define AMBIX_ENCODERS_H_

#include <string>
#include <vector>

#include <Eigen/Core>

#include "ambix/atf.h"
#include "ambix/dsp.h"

namespace ambix {

// Time-invariant least-squares encoder: one (N+1)^2 x P matrix per ATF bin.
struct StaticEncoder {
  int order = 1;
  int mics = 0;
  int bins = 0;
  std::string atf_hash;
  std::vector<Eigen::MatrixXcd> matrices;
};

// Weighted least-squares encoding matrix for one bin.
//   h: P x D ATFs, y: D x L spherical harmonics, w: D quadrature weights.
// Minimises sum_d w_d |E h_d - y_d|^2, optionally loaded with
// diag_load * tr/P on the normal matrix. With diag_load == 0 a singular
// normal matrix raises kNumericalError.
Eigen::MatrixXcd StaticEncoderBin(const Eigen::MatrixXcd& h, const Eigen::MatrixXd& y,
                                  const std::vector<double>& w, double diag_load);

// Weighted residual sum_d w_d |E h_d - y_d|^2.
double WeightedResidual(const Eigen::MatrixXcd& e, const Eigen::MatrixXcd& h,
                        const Eigen::MatrixXd& y, const std::vector<double>& w);

StaticEncoder ComputeStaticEncoder(const AtfSet& atfs, int order, double diag_load = 1e-5);

void SaveStaticEncoder(const StaticEncoder& enc, const std::string& path);
StaticEncoder LoadStaticEncoder(const std::string& path);

// Nearest encoder bin for STFT bin f when the encoder has fewer bins.
int MapBin(int f, int stft_bins, int encoder_bins);

// B[l,f,t] = sum_p E[l,p,f'] X[p,f,t].
Spectrogram ApplyStatic(const StaticEncoder& enc, const Spectrogram& x);

// Oracle DOAs per STFT frame. An inactive slot is ignored; a frame with no
// active slot is encoded by the static encoder alone.
struct OracleDoaTrack {
  struct Slot {
    Eigen::Vector3d doa = Eigen::Vector3d::UnitX();
    bool active = false;
  };
  std::vector<std::vector<Slot>> frames;  // frames x up to 2 slots

  // The same DOAs, all active, in every frame.
  static OracleDoaTrack Constant(const std::vector<Eigen::Vector3d>& doas, int frames);
};

struct ParametricOptions {
  double regularization = 1e-3;  // lambda relative to tr(H H^H / D) / P
  double grid_tolerance_deg = 10.0;
};

// Oracle-DOA parametric synthesis: each active source is extracted by a
// regularised matched filter normalised to unit gain at its DOA and encoded
// with the exact-DOA spherical harmonics; the residual is encoded by `ambience`.
// DOAs further than the tolerance from every grid direction add a message to
// `warnings` (if given) and use the nearest direction.
Spectrogram ParametricOracle(const Spectrogram& x, const AtfSet& atfs,
                             const OracleDoaTrack& doas, int order,
                             const StaticEncoder& ambience,
                             const ParametricOptions& options = {},
                             std::vector<std::string>* warnings = nullptr);

}  // namespace ambix

#endif  // AMBIX_ENCODERS_H_
