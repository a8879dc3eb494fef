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

// Python bindings: audio I/O, STFT, spherical harmonics, encoders, metrics
// and the trained model.

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <complex>
#include <string>

#include "ambix/atf.h"
#include "ambix/dataset.h"
#include "ambix/dsp.h"
#include "ambix/encoders.h"
#include "ambix/error.h"
#include "ambix/metrics.h"
#include "ambix/model.h"
#include "ambix/spatial.h"
#include "ambix/training.h"
#include "ambix/wav.h"
#include "nlohmann/json.hpp"

namespace py = pybind11;

namespace {

using Array2 = py::array_t<double, py::array::c_style | py::array::forcecast>;
using ComplexArray3 = py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>;

ambix::AudioBuffer ToAudio(const Array2& a, int rate) {
  ambix::Require(a.ndim() == 2, ambix::ErrorCode::kShapeError,
                 "audio must be a 2-D array (channels, samples)");
  const auto channels = static_cast<std::size_t>(a.shape(0));
  const auto samples = static_cast<std::size_t>(a.shape(1));
  ambix::AudioBuffer out(channels, samples, rate);
  const double* p = a.data();
  for (std::size_t c = 0; c < channels; ++c)
    std::copy(p + c * samples, p + (c + 1) * samples, out.channels[c].begin());
  return out;
}

py::array_t<double> FromAudio(const ambix::AudioBuffer& a) {
  py::array_t<double> out({a.num_channels(), a.num_samples()});
  double* p = out.mutable_data();
  for (std::size_t c = 0; c < a.num_channels(); ++c)
    std::copy(a.channels[c].begin(), a.channels[c].end(), p + c * a.num_samples());
  return out;
}

ambix::StftParams Params(int fft_size, int frame_length, int hop, int rate) {
  ambix::StftParams p;
  p.fft_size = fft_size;
  p.frame_length = frame_length;
  p.hop = hop;
  p.sample_rate = rate;
  p.Validate();
  return p;
}

py::array_t<std::complex<double>> FromSpectrogram(const ambix::Spectrogram& s) {
  py::array_t<std::complex<double>> out({s.channels(), s.bins(), s.frames()});
  std::copy(s.data().begin(), s.data().end(), out.mutable_data());
  return out;
}

ambix::nn::ModelConfig ModelConfigFrom(const std::string& spec) {
  if (spec == "paper") return ambix::nn::ModelConfig::Paper();
  if (spec == "desk") return ambix::nn::ModelConfig::Desk();
  try {
    return ambix::nn::ModelConfig::FromJson(nlohmann::json::parse(spec));
  } catch (const nlohmann::json::exception& e) {
    ambix::Fail(ambix::ErrorCode::kConfigError, std::string("model config: ") + e.what());
  }
}

}  // namespace

PYBIND11_MODULE(_ambix, m) {
  m.doc() = "Microphone array to Ambisonics encoding";

  static py::exception<ambix::Error> error(m, "AmbixError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ambix::Error& e) {
      py::object type = py::reinterpret_borrow<py::object>(error.ptr());
      py::object instance = type(e.what());
      instance.attr("code") = std::string(ambix::ErrorCodeName(e.code()));
      PyErr_SetObject(error.ptr(), instance.ptr());
    }
  });

  m.def("sh_vector",
        [](double azimuth, double colatitude, int order) {
          return ambix::ShVector(ambix::Direction::FromColatitude(azimuth, colatitude), order);
        },
        py::arg("azimuth"), py::arg("colatitude"), py::arg("order") = 1,
        "Real N3D spherical harmonics in ACN order, without Condon-Shortley phase.");

  m.def("fibonacci_grid",
        [](int count) {
          const auto grid = ambix::FibonacciGrid(count);
          py::array_t<double> out({static_cast<py::ssize_t>(grid.size()), py::ssize_t{2}});
          auto r = out.mutable_unchecked<2>();
          for (std::size_t d = 0; d < grid.size(); ++d) {
            r(d, 0) = grid[d].azimuth;
            r(d, 1) = grid[d].colatitude;
          }
          return out;
        },
        py::arg("count"), "Directions as (azimuth, colatitude) rows in radians.");

  m.def("stft",
        [](const Array2& x, int fft_size, int frame_length, int hop, int rate) {
          return FromSpectrogram(
              ambix::Stft(ToAudio(x, rate), Params(fft_size, frame_length, hop, rate)));
        },
        py::arg("x"), py::arg("fft_size") = 256, py::arg("frame_length") = 128,
        py::arg("hop") = 64, py::arg("sample_rate") = 24000,
        "Complex spectrogram (channels, bins, frames) with a sqrt-Hann window.");

  m.def("istft",
        [](const ComplexArray3& spec, std::size_t length, int fft_size, int frame_length,
           int hop, int rate) {
          ambix::Require(spec.ndim() == 3, ambix::ErrorCode::kShapeError,
                         "spectrogram must be (channels, bins, frames)");
          const auto params = Params(fft_size, frame_length, hop, rate);
          ambix::Require(spec.shape(1) == params.bins(), ambix::ErrorCode::kShapeError,
                         "bin count does not match fft_size");
          ambix::Spectrogram s(static_cast<int>(spec.shape(0)), static_cast<int>(spec.shape(2)),
                               params);
          std::copy(spec.data(), spec.data() + spec.size(), s.data().begin());
          return FromAudio(ambix::Istft(s, length));
        },
        py::arg("spec"), py::arg("length"), py::arg("fft_size") = 256,
        py::arg("frame_length") = 128, py::arg("hop") = 64, py::arg("sample_rate") = 24000);

  m.def("read_wav",
        [](const std::string& path) {
          const auto a = ambix::ReadWav(path);
          return py::make_tuple(FromAudio(a), a.sample_rate);
        },
        py::arg("path"), "Returns (samples[channels, n], sample_rate).");

  m.def("write_wav",
        [](const std::string& path, const Array2& x, int rate, const std::string& comment) {
          ambix::WriteWav(path, ToAudio(x, rate), comment);
        },
        py::arg("path"), py::arg("x"), py::arg("sample_rate"), py::arg("comment") = "",
        "Writes 32-bit float.");

  m.def("load_atf",
        [](const std::string& path) {
          const auto set = ambix::LoadAtfSet(path);
          py::array_t<std::complex<float>> values(
              {set.mics(), set.directions(), set.bins()});
          std::copy(set.values().begin(), set.values().end(), values.mutable_data());
          py::array_t<double> dirs({set.directions(), 2});
          auto r = dirs.mutable_unchecked<2>();
          for (int d = 0; d < set.directions(); ++d) {
            r(d, 0) = set.grid()[d].azimuth;
            r(d, 1) = set.grid()[d].colatitude;
          }
          py::dict out;
          out["values"] = values;
          out["directions"] = dirs;
          out["sample_rate"] = set.sample_rate();
          return out;
        },
        py::arg("path"), "ATF values (mics, directions, bins) with the direction grid.");

  m.def("encode_static",
        [](const std::string& atf_path, const Array2& mic, int order) {
          const auto atfs = ambix::LoadAtfSet(atf_path);
          const auto x = ToAudio(mic, atfs.sample_rate());
          ambix::StftParams params;
          params.sample_rate = atfs.sample_rate();
          const auto enc = ambix::ComputeStaticEncoder(atfs, order);
          return FromAudio(ambix::Istft(ambix::ApplyStatic(enc, ambix::Stft(x, params)),
                                        x.num_samples()));
        },
        py::arg("atf_path"), py::arg("mic"), py::arg("order") = 1,
        "Least-squares static encoder applied to a (mics, samples) recording.");

  m.def("encode",
        [](const std::string& checkpoint, const std::string& atf_path, const Array2& mic) {
          const auto model = ambix::LoadModel(checkpoint);
          const auto atfs = ambix::LoadAtfSet(atf_path);
          return FromAudio(ambix::EncodeWithModel(model, ToAudio(mic, atfs.sample_rate()), atfs));
        },
        py::arg("checkpoint"), py::arg("atf_path"), py::arg("mic"),
        "Encodes a (mics, samples) recording with a trained model.");

  m.def("si_sdr",
        [](const Array2& estimate, const Array2& reference) {
          return ambix::SiSdr(ToAudio(estimate, 24000), ToAudio(reference, 24000)).per_channel;
        },
        py::arg("estimate"), py::arg("reference"), "Per-channel SI-SDR in dB.");

  m.def("metrics",
        [](const Array2& estimate, const Array2& reference, int rate) {
          ambix::StftParams params;
          params.sample_rate = rate;
          const auto r = ambix::ComputeMetrics(ToAudio(estimate, rate), ToAudio(reference, rate),
                                               params);
          py::dict out;
          out["si_sdr"] = r.si_sdr.mean;
          out["coh"] = r.coherence;
          out["ms_err"] = r.ms_err;
          return out;
        },
        py::arg("estimate"), py::arg("reference"), py::arg("sample_rate") = 24000);

  m.def("parameter_count",
        [](const std::string& config) {
          const auto c = ModelConfigFrom(config);
          c.Validate();
          return ambix::nn::Model<float>(c, 0).params().NumParameters();
        },
        py::arg("config") = "paper",
        "Learnable parameters of \"paper\", \"desk\" or a JSON model configuration.");

  m.def("build_dataset",
        [](const std::string& config_json, const std::string& out, int jobs) {
          nlohmann::json j;
          try {
            j = nlohmann::json::parse(config_json);
          } catch (const nlohmann::json::exception& e) {
            ambix::Fail(ambix::ErrorCode::kConfigError, e.what());
          }
          py::gil_scoped_release release;
          return ambix::BuildDataset(ambix::DatasetConfig::FromJson(j), out, jobs).size();
        },
        py::arg("config_json"), py::arg("out"), py::arg("jobs") = 1,
        "Simulates a dataset; returns the number of examples.");
}
