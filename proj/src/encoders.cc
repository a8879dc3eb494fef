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

#include "ambix/encoders.h"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "ambix/container.h"
#include "ambix/error.h"
#include "ambix/spatial.h"

namespace ambix {
namespace {

constexpr int kEncoderVersion = 1;

}  // namespace

Eigen::MatrixXcd StaticEncoderBin(const Eigen::MatrixXcd& h, const Eigen::MatrixXd& y,
                                  const std::vector<double>& w, double diag_load) {
  const Eigen::Index p = h.rows();
  const Eigen::Index d = h.cols();
  Require(y.rows() == d && static_cast<Eigen::Index>(w.size()) == d, ErrorCode::kShapeError,
          "ATF, SH and weight dimensions disagree");
  Require(diag_load >= 0, ErrorCode::kInvalidArgument, "diag_load must be >= 0");
  const Eigen::Map<const Eigen::VectorXd> wv(w.data(), d);
  const Eigen::MatrixXcd hw = h * wv.asDiagonal();
  Eigen::MatrixXcd normal = hw * h.adjoint();
  const Eigen::MatrixXcd rhs = y.transpose().cast<std::complex<double>>() * hw.adjoint();
  const double trace = normal.trace().real();
  Require(trace > 0 && std::isfinite(trace), ErrorCode::kNumericalError,
          "ATF matrix has no energy");
  if (diag_load > 0) {
    normal.diagonal().array() += diag_load * trace / static_cast<double>(p);
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(normal);
  const auto& ev = eig.eigenvalues();
  Require(ev.minCoeff() > 1e-12 * ev.maxCoeff(), ErrorCode::kNumericalError,
          "normal matrix is singular (condition " +
              std::to_string(ev.maxCoeff() / std::max(ev.minCoeff(), 1e-300)) +
              "); use diag_load > 0");
  // E normal = rhs, with normal Hermitian positive definite.
  return (rhs * eig.eigenvectors()) * ev.cwiseInverse().asDiagonal() *
         eig.eigenvectors().adjoint();
}

double WeightedResidual(const Eigen::MatrixXcd& e, const Eigen::MatrixXcd& h,
                        const Eigen::MatrixXd& y, const std::vector<double>& w) {
  const Eigen::MatrixXcd diff = e * h - y.transpose().cast<std::complex<double>>();
  double total = 0.0;
  for (Eigen::Index d = 0; d < h.cols(); ++d) total += w[d] * diff.col(d).squaredNorm();
  return total;
}

StaticEncoder ComputeStaticEncoder(const AtfSet& atfs, int order, double diag_load) {
  Require(order >= 0 && order <= kMaxShOrder, ErrorCode::kUnsupportedOrder,
          "order must be in [0, " + std::to_string(kMaxShOrder) + "]");
  const ShMatrix sh = ComputeShMatrix(atfs.grid(), order);
  StaticEncoder enc;
  enc.order = order;
  enc.mics = atfs.mics();
  enc.bins = atfs.bins();
  enc.atf_hash = atfs.Hash();
  enc.matrices.reserve(atfs.bins());
  for (int f = 0; f < atfs.bins(); ++f) {
    try {
      enc.matrices.push_back(
          StaticEncoderBin(atfs.BinMatrix(f), sh.values, atfs.grid().weights(), diag_load));
    } catch (const Error& e) {
      Fail(e.code(), "bin " + std::to_string(f) + ": " + e.what());
    }
  }
  return enc;
}

void SaveStaticEncoder(const StaticEncoder& enc, const std::string& path) {
  const int channels = ShChannelCount(enc.order);
  nlohmann::json header = {{"version", kEncoderVersion}, {"order", enc.order},
                           {"P", enc.mics},              {"F_H", enc.bins},
                           {"atf_hash", enc.atf_hash},   {"layout", "l-major, p, f-minor"}};
  std::vector<float> payload;
  payload.reserve(static_cast<std::size_t>(channels) * enc.mics * enc.bins * 2);
  for (int l = 0; l < channels; ++l) {
    for (int p = 0; p < enc.mics; ++p) {
      for (int f = 0; f < enc.bins; ++f) {
        const auto v = enc.matrices[f](l, p);
        payload.push_back(static_cast<float>(v.real()));
        payload.push_back(static_cast<float>(v.imag()));
      }
    }
  }
  WriteContainer(path, "ENC1", header, payload);
}

StaticEncoder LoadStaticEncoder(const std::string& path) {
  const Container c = ReadContainer(path, "ENC1");
  StaticEncoder enc;
  try {
    Require(c.header.at("version").get<int>() == kEncoderVersion, ErrorCode::kFormatError,
            path + ": unsupported encoder version");
    enc.order = c.header.at("order").get<int>();
    enc.mics = c.header.at("P").get<int>();
    enc.bins = c.header.at("F_H").get<int>();
    enc.atf_hash = c.header.at("atf_hash").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kFormatError, path + ": bad encoder header: " + e.what());
  }
  Require(enc.order >= 0 && enc.order <= kMaxShOrder && enc.mics > 0 && enc.bins > 0,
          ErrorCode::kFormatError, path + ": invalid encoder dimensions");
  const int channels = ShChannelCount(enc.order);
  Require(c.payload.size() == static_cast<std::size_t>(channels) * enc.mics * enc.bins * 2,
          ErrorCode::kFormatError, path + ": payload size does not match header");
  enc.matrices.assign(enc.bins, Eigen::MatrixXcd(channels, enc.mics));
  std::size_t i = 0;
  for (int l = 0; l < channels; ++l) {
    for (int p = 0; p < enc.mics; ++p) {
      for (int f = 0; f < enc.bins; ++f, i += 2) {
        enc.matrices[f](l, p) = {c.payload[i], c.payload[i + 1]};
      }
    }
  }
  return enc;
}

int MapBin(int f, int stft_bins, int encoder_bins) {
  if (stft_bins == encoder_bins) return f;
  Require(stft_bins > 1 && encoder_bins > 0, ErrorCode::kInvalidArgument, "invalid bin counts");
  return static_cast<int>(
      std::lround(static_cast<double>(f) * (encoder_bins - 1) / (stft_bins - 1)));
}

Spectrogram ApplyStatic(const StaticEncoder& enc, const Spectrogram& x) {
  Require(x.channels() == enc.mics, ErrorCode::kInvalidArgument,
          "spectrogram has " + std::to_string(x.channels()) + " channels, encoder expects " +
              std::to_string(enc.mics));
  const int channels = ShChannelCount(enc.order);
  Spectrogram out(channels, x.frames(), x.params());
  for (int f = 0; f < x.bins(); ++f) {
    const auto& e = enc.matrices[MapBin(f, x.bins(), enc.bins)];
    for (int l = 0; l < channels; ++l) {
      for (int p = 0; p < enc.mics; ++p) {
        const Complex g = e(l, p);
        for (int t = 0; t < x.frames(); ++t) out.at(l, f, t) += g * x.at(p, f, t);
      }
    }
  }
  return out;
}

OracleDoaTrack OracleDoaTrack::Constant(const std::vector<Eigen::Vector3d>& doas, int frames) {
  OracleDoaTrack track;
  std::vector<Slot> slots;
  for (const auto& d : doas) slots.push_back({d.normalized(), true});
  track.frames.assign(frames, slots);
  return track;
}

Spectrogram ParametricOracle(const Spectrogram& x, const AtfSet& atfs,
                             const OracleDoaTrack& doas, int order,
                             const StaticEncoder& ambience, const ParametricOptions& options,
                             std::vector<std::string>* warnings) {
  Require(x.channels() == atfs.mics(), ErrorCode::kInvalidArgument,
          "spectrogram channels do not match the ATF mic count");
  Require(static_cast<int>(doas.frames.size()) == x.frames(), ErrorCode::kShapeError,
          "DOA track length does not match the spectrogram frames");
  Require(ambience.order == order && ambience.mics == atfs.mics(), ErrorCode::kInvalidArgument,
          "ambience encoder does not match order or mic count");
  const int channels = ShChannelCount(order);
  const int p_count = atfs.mics();
  const double tolerance = options.grid_tolerance_deg * std::numbers::pi / 180.0;

  // Distinct DOAs across the track, resolved once.
  struct Resolved {
    Eigen::Vector3d doa;
    int grid_index;
    Eigen::VectorXcd sh;
  };
  std::vector<Resolved> resolved;
  std::vector<std::vector<int>> frame_sources(x.frames());
  for (int t = 0; t < x.frames(); ++t) {
    for (const auto& slot : doas.frames[t]) {
      if (!slot.active) continue;
      int found = -1;
      for (std::size_t i = 0; i < resolved.size(); ++i) {
        if ((resolved[i].doa - slot.doa).norm() < 1e-12) found = static_cast<int>(i);
      }
      if (found < 0) {
        const Eigen::Vector3d u = slot.doa.normalized();
        const auto g = static_cast<int>(atfs.grid().Nearest(u));
        const double miss = AngularDistance(Direction::FromUnit(u), atfs.grid()[g]);
        if (miss > tolerance && warnings != nullptr) {
          warnings->push_back("DOA " + std::to_string(miss * 180 / std::numbers::pi) +
                              " deg from the nearest grid direction");
        }
        const auto y = ShVector(Direction::FromUnit(u), order);
        Eigen::VectorXcd sh(channels);
        for (int l = 0; l < channels; ++l) sh[l] = y[l];
        resolved.push_back({slot.doa, g, sh});
        found = static_cast<int>(resolved.size()) - 1;
      }
      frame_sources[t].push_back(found);
    }
  }

  // Per encoder bin: unit-gain filters and steering vectors per resolved DOA.
  std::vector<std::vector<Eigen::VectorXcd>> filters(ambience.bins);
  std::vector<std::vector<Eigen::VectorXcd>> steering(ambience.bins);
  for (int fh = 0; fh < ambience.bins; ++fh) {
    const Eigen::MatrixXcd h = atfs.BinMatrix(fh);
    Eigen::MatrixXcd r = h * h.adjoint() / static_cast<double>(h.cols());
    r.diagonal().array() += options.regularization * r.trace().real() / p_count;
    const auto solver = r.ldlt();
    for (const auto& res : resolved) {
      const Eigen::VectorXcd hs = h.col(res.grid_index);
      Eigen::VectorXcd w = solver.solve(hs);
      const Complex gain = w.adjoint() * hs;
      if (std::abs(gain) > 1e-300) w /= std::conj(gain);
      filters[fh].push_back(w);
      steering[fh].push_back(hs);
    }
  }

  // Sources are removed from the mixture and encoded directly; whatever is
  // left goes through the static encoder, so frames without an active DOA
  // reproduce ApplyStatic exactly.
  Spectrogram residual = x;
  Spectrogram direct(channels, x.frames(), x.params());
  Eigen::VectorXcd xv(p_count);
  for (int f = 0; f < x.bins(); ++f) {
    const int fh = MapBin(f, x.bins(), ambience.bins);
    for (int t = 0; t < x.frames(); ++t) {
      if (frame_sources[t].empty()) continue;
      for (int p = 0; p < p_count; ++p) xv[p] = x.at(p, f, t);
      for (int s : frame_sources[t]) {
        const Complex est = filters[fh][s].dot(xv);  // w^H x
        for (int l = 0; l < channels; ++l) direct.at(l, f, t) += est * resolved[s].sh[l];
        for (int p = 0; p < p_count; ++p) residual.at(p, f, t) -= est * steering[fh][s][p];
      }
    }
  }
  Spectrogram out = ApplyStatic(ambience, residual);
  for (int t = 0; t < x.frames(); ++t) {
    if (frame_sources[t].empty()) continue;
    for (int l = 0; l < channels; ++l) {
      for (int f = 0; f < x.bins(); ++f) out.at(l, f, t) += direct.at(l, f, t);
    }
  }
  return out;
}

}  // namespace ambix
