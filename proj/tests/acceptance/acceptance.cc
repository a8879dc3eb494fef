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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.
//
// The desk-scale experiment behind criteria 5-7 takes most of the runtime.
// Its dataset and checkpoint are cached in the work directory, keyed by the
// full dataset and training configurations; --fresh recomputes them.

#include <malloc.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "../gradcheck.h"
#include "CLI11.hpp"
#include "ambix/atf.h"
#include "ambix/attention.h"
#include "ambix/dataset.h"
#include "ambix/dsp.h"
#include "ambix/encoders.h"
#include "ambix/error.h"
#include "ambix/model.h"
#include "ambix/render.h"
#include "ambix/room.h"
#include "ambix/spatial.h"
#include "ambix/training.h"
#include "nlohmann/json.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ambix;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double Since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string Fmt(double v, int precision = 3) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

json ReadJson(const fs::path& p) {
  std::ifstream in(p);
  Require(static_cast<bool>(in), ErrorCode::kIoError, "cannot open " + p.string());
  return json::parse(in);
}

void WriteJson(const fs::path& p, const json& j) {
  std::ofstream out(p);
  out << j.dump(2) << '\n';
  Require(static_cast<bool>(out), ErrorCode::kIoError, "cannot write " + p.string());
}

std::string ReadBytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// ---- 1: gradients -------------------------------------------------------------

Outcome GradientCorrectness() {
  using nn::testing::MaxGradError;
  using nn::testing::RandomParam;
  using TD = nn::Tensor<double>;
  using In = const std::vector<TD>&;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::vector<std::pair<std::string, double>> errors;
  auto check = [&](const std::string& name, const nn::testing::Fn& f, std::vector<TD> inputs) {
    errors.emplace_back(name, MaxGradError(f, std::move(inputs)));
  };
  check("conv2d", [](In v) { return nn::Conv2d(v[0], v[1], v[2]); },
        {RandomParam({3, 7, 6}, rng), RandomParam({4, 3, 6, 6}, rng), RandomParam({4}, rng)});
  check("conv_transpose",
        [](In v) { return nn::SliceLast(nn::ConvTranspose2d(v[0], v[1], v[2], 2), 0, 9); },
        {RandomParam({3, 4, 5}, rng), RandomParam({3, 5, 1, 4}, rng), RandomParam({5}, rng)});
  check("group_norm", [](In v) { return nn::GroupNorm(v[0], v[1], v[2], 2); },
        {RandomParam({4, 3, 5}, rng), RandomParam({4}, rng), RandomParam({4}, rng)});
  {
    std::vector<TD> in{RandomParam({2, 3, 4}, rng), RandomParam({2, 5, 4}, rng)};
    for (int i = 0; i < 4; ++i) {
      in.push_back(RandomParam({4, 4}, rng, 0.5));
      in.push_back(RandomParam({4}, rng, 0.5));
    }
    check("attention",
          [](In v) {
            nn::AttentionParams<double> p{v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9]};
            return nn::MultiheadAttention(v[0], v[1], p, 2, 0.5).out;
          },
          in);
  }
  check("relu", [](In v) { return nn::Relu(v[0]); }, {RandomParam({3, 5}, rng)});
  check("softmax", [](In v) { return nn::Softmax(v[0]); }, {RandomParam({3, 5}, rng)});
  check("linear", [](In v) { return nn::Linear(v[0], v[1], v[2]); },
        {RandomParam({2, 3, 4}, rng), RandomParam({5, 4}, rng), RandomParam({5}, rng)});
  check("batch_matmul", [](In v) { return nn::BatchMatMul(v[0], v[1], false, true); },
        {RandomParam({2, 3, 4}, rng), RandomParam({2, 5, 4}, rng)});
  check("permute", [](In v) { return nn::Permute(v[0], {2, 0, 3, 1}); },
        {RandomParam({2, 3, 4, 5}, rng)});
  check("mse", [](In v) { return nn::MseLoss(v[0], v[1]); },
        {RandomParam({3, 4}, rng), RandomParam({3, 4}, rng)});
  check("mix", [](In v) { return nn::Mix(v[0], v[1]); },
        {RandomParam({3, 4, 2, 5}, rng), RandomParam({4, 2, 5}, rng)});
  check("dropout",
        [](In v) {
          std::mt19937_64 local(77);
          return nn::Dropout(v[0], 0.3, true, local);
        },
        {RandomParam({20}, rng)});
  {
    const StftParams paper;
    check("istft", [&](In v) { return nn::IstftLayer(v[0], paper, 100); },
          {RandomParam({2, paper.bins(), 3}, rng)});
  }
  {
    nn::ModelConfig tiny;
    tiny.channels = 12;
    tiny.conv_channels = {8, 12};
    tiny.norm_groups = 4;
    tiny.bins = 9;
    tiny.atf_bins = 5;
    nn::Model<double> model(tiny, 11);
    std::vector<TD> inputs{RandomParam({8, 9, 3}, rng), RandomParam({8, 6, 5}, rng)};
    for (const auto& name : model.params().names()) inputs.push_back(model.params().Get(name));
    const auto length = tiny.stft().ReconstructableLength(3);
    check("tiny_model",
          [&](In v) {
            std::mt19937_64 drop(5);
            return model.Forward(v[0], v[1], length, true, &drop).signal;
          },
          inputs);
  }
  double worst = 0.0;
  std::string worst_name;
  for (const auto& [name, e] : errors)
    if (e >= worst) worst = e, worst_name = name;
  const double seconds = Since(t0);
  return {worst <= 1e-4 && seconds < 120,
          std::to_string(errors.size()) + " checks, max relative error " + Fmt(worst) + " (" +
              worst_name + "), " + Fmt(seconds) + " s"};
}

// ---- 2: STFT ------------------------------------------------------------------

Outcome StftFidelity() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0, 1);
  AudioBuffer x(4, 24000, 24000);
  for (auto& ch : x.channels)
    for (auto& v : ch) v = n(rng);
  const StftParams params;
  const auto y = Istft(Stft(x, params), x.num_samples());
  double err = 0, ref = 0;
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t i = 0; i < x.num_samples(); ++i) {
      err += std::pow(y.channels[c][i] - x.channels[c][i], 2);
      ref += x.channels[c][i] * x.channels[c][i];
    }
  const double db = 10 * std::log10(err / ref);
  const double seconds = Since(t0);
  return {db <= -80 && seconds < 1,
          "relative error " + Fmt(db, 4) + " dB (fft 256, frame 128, hop 64), " + Fmt(seconds) +
              " s"};
}

// ---- 3: static encoder ----------------------------------------------------------

Outcome StaticEncoderOptimality() {
  const auto t0 = Clock::now();
  const auto grid = FibonacciGrid(240);
  const auto y = ComputeShMatrix(grid, 1).values;
  const auto& w = grid.weights();
  std::mt19937_64 rng(33);
  double worst = 0.0;
  int singular_dc = 0;
  for (int set = 0; set < 100; ++set) {
    const auto atfs = FreefieldAtfSet(SampleArray(rng), grid, 65, 24000);
    for (int f = 1; f < atfs.bins(); ++f) {
      const Eigen::MatrixXcd h = atfs.BinMatrix(f);
      const auto e = StaticEncoderBin(h, y, w, 0.0);
      // Oracle: SVD pseudoinverse of the square-root-weighted problem.
      Eigen::VectorXd sw(h.cols());
      for (Eigen::Index d = 0; d < h.cols(); ++d) sw[d] = std::sqrt(w[d]);
      const Eigen::MatrixXcd hw = h * sw.asDiagonal();
      const Eigen::MatrixXcd yw = (sw.asDiagonal() * y).transpose().cast<std::complex<double>>();
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(hw, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const auto& s = svd.singularValues();
      Eigen::VectorXd inv(s.size());
      for (Eigen::Index i = 0; i < s.size(); ++i) inv[i] = s[i] > 1e-14 * s[0] ? 1 / s[i] : 0;
      const Eigen::MatrixXcd oracle = yw * svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
      const double r = WeightedResidual(e, h, y, w);
      const double ro = WeightedResidual(oracle, h, y, w);
      worst = std::max(worst, std::abs(r - ro) / std::max(1.0, ro));
    }
    try {
      ComputeStaticEncoder(atfs, 1, 0.0);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kNumericalError) ++singular_dc;
    }
  }
  const double seconds = Since(t0);
  return {worst <= 1e-8 && singular_dc == 100 && seconds < 60,
          "100 free-field sets x 64 bins, max residual deviation " + Fmt(worst) +
              "; rank-one DC bin rejected without loading in " + std::to_string(singular_dc) +
              "/100; " + Fmt(seconds) + " s"};
}

// ---- 4: simulation physics ------------------------------------------------------

Outcome SimulationPhysics() {
  const auto t0 = Clock::now();
  constexpr int kRate = 24000;
  const auto grid = FibonacciGrid(240);
  std::mt19937_64 rng(44);
  const auto atfs = FreefieldAtfSet(SampleArray(rng), grid, 65, kRate);
  const int modeling_delay = atfs.IrLength() / 2;
  double worst_delay = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Scene s = SampleScene(100 + seed);
    s.sources.resize(1);
    RenderOptions o;
    o.images.absorption = 1.0;
    o.output_length = 4096;
    const auto out = RenderScene(s, {{1.0}}, kRate, atfs, o);
    const auto& w = out.reference.channels[0];
    const auto peak = std::max_element(w.begin(), w.end(), [](double a, double b) {
                        return std::abs(a) < std::abs(b);
                      }) - w.begin();
    // Parabolic interpolation around the peak.
    double frac = 0.0;
    if (peak > 0 && peak + 1 < static_cast<long>(w.size())) {
      const double a = w[peak - 1], b = w[peak], c = w[peak + 1];
      const double den = a - 2 * b + c;
      if (den != 0) frac = 0.5 * (a - c) / den;
    }
    const double measured = peak + frac - modeling_delay;
    const double expected = (s.sources[0].position - s.array_position).norm() / kSpeedOfSound * kRate;
    worst_delay = std::max(worst_delay, std::abs(measured - expected));
  }
  double worst_rt = 0.0;
  for (std::uint64_t seed : {1, 2, 3, 4}) {
    for (double rt60 : {0.3, 0.4, 0.5}) {
      Scene s = SampleScene(seed);
      s.sources.resize(1);
      s.rt60 = rt60;
      // First-difference excitation removes the DC build-up of the image tail.
      const auto out = RenderScene(s, {{1.0, -1.0}}, kRate, atfs);
      for (const auto* ch : {&out.reference.channels[0], &out.mic.channels[0]})
        worst_rt = std::max(worst_rt, std::abs(SchroederRt60(*ch, kRate) - rt60) / rt60);
    }
  }
  const double seconds = Since(t0);
  return {worst_delay <= 1.0 && worst_rt <= 0.2 && seconds < 300,
          "anechoic delay error max " + Fmt(worst_delay) + " samples over 10 scenes; RT60 error " +
              "max " + Fmt(100 * worst_rt) + "% over 12 renders; " + Fmt(seconds) + " s"};
}

// ---- 5-7: desk experiment -------------------------------------------------------

struct DeskRun {
  std::vector<ExampleMetrics> proposed, stat, parametric, doa;
  double data_seconds = 0, train_seconds = 0, eval_seconds = 0;
  double static_eval_seconds = 0, parametric_eval_seconds = 0;
  bool reused_data = false, reused_training = false;
  std::string error;
};

double Mean(const std::vector<ExampleMetrics>& m, double ExampleMetrics::*field) {
  double s = 0;
  for (const auto& e : m) s += e.*field;
  return m.empty() ? std::nan("") : s / m.size();
}

DeskRun RunDesk(const fs::path& work, const fs::path& configs, bool fresh) {
  DeskRun run;
  try {
    const auto data_config = DatasetConfig::FromJson(ReadJson(configs / "desk_data.json"));
    const auto train_config = TrainConfig::FromJson(ReadJson(configs / "desk_train.json"));
    const fs::path desk = work / "desk";
    const fs::path data = desk / "data";
    const fs::path ckpt = desk / "model.ckpt";
    const fs::path data_done = desk / "data.done.json";
    const fs::path train_done = desk / "train.done.json";
    if (fresh) fs::remove_all(desk);
    fs::create_directories(desk);

    if (fs::exists(data_done) && ReadJson(data_done).at("config") == data_config.ToJson()) {
      run.data_seconds = ReadJson(data_done).at("seconds");
      run.reused_data = true;
    } else {
      fs::remove_all(data);
      fs::remove(train_done);
      std::cerr << "desk: generating dataset\n";
      const auto t0 = Clock::now();
      BuildDataset(data_config, data.string(), 1);
      run.data_seconds = Since(t0);
      WriteJson(data_done, {{"config", data_config.ToJson()}, {"seconds", run.data_seconds}});
    }

    if (fs::exists(train_done) && fs::exists(ckpt) &&
        ReadJson(train_done).at("config") == train_config.ToJson()) {
      run.train_seconds = ReadJson(train_done).at("seconds");
      run.reused_training = true;
    } else {
      std::cerr << "desk: training\n";
      const auto t0 = Clock::now();
      TrainOptions options;
      options.progress = [](const std::string& s) { std::cerr << "desk: " << s << std::endl; };
      const auto result = Train(train_config, data.string(), ckpt.string(), options);
      run.train_seconds = Since(t0);
      WriteJson(train_done, {{"config", train_config.ToJson()},
                             {"seconds", run.train_seconds},
                             {"best_val", result.best_val},
                             {"best_epoch", result.best_epoch},
                             {"epochs", result.log.size() - 1},
                             {"early_stopped", result.early_stopped}});
    }

    std::cerr << "desk: evaluating\n";
    const auto test = ReadSplit(data.string(), "test");
    const auto doa = ReadSplit(data.string(), "doa");
    EvalOptions options;
    options.checkpoint = ckpt.string();
    auto t0 = Clock::now();
    run.stat = Evaluate(Method::kStatic, data.string(), test);
    run.static_eval_seconds = Since(t0);
    t0 = Clock::now();
    run.parametric = Evaluate(Method::kParametric, data.string(), test);
    run.parametric_eval_seconds = Since(t0);
    t0 = Clock::now();
    run.proposed = Evaluate(Method::kProposed, data.string(), test, options);
    options.attention_dir = (desk / "report_doa" / "attention").string();
    run.doa = Evaluate(Method::kProposed, data.string(), doa, options);
    run.eval_seconds = Since(t0) + run.static_eval_seconds;

    std::vector<ExampleMetrics> all = run.proposed;
    all.insert(all.end(), run.stat.begin(), run.stat.end());
    all.insert(all.end(), run.parametric.begin(), run.parametric.end());
    const int rate = data_config.sample_rate;
    StftParams params;
    params.sample_rate = rate;
    WriteReport((desk / "report").string(), all, rate, params);
    auto doa_all = run.doa;
    const auto doa_static = Evaluate(Method::kStatic, data.string(), doa);
    doa_all.insert(doa_all.end(), doa_static.begin(), doa_static.end());
    WriteReport((desk / "report_doa").string(), doa_all, rate, params);
  } catch (const std::exception& e) {
    run.error = e.what();
  }
  return run;
}

Outcome FreeFieldTrend(const DeskRun& run) {
  if (!run.error.empty()) return {false, "desk run failed: " + run.error};
  const double p = Mean(run.proposed, &ExampleMetrics::si_sdr);
  const double s = Mean(run.stat, &ExampleMetrics::si_sdr);
  const double total = run.data_seconds + run.train_seconds + run.eval_seconds;
  return {p > s && total <= 7200,
          "mean SI-SDR proposed " + Fmt(p, 4) + " dB vs static " + Fmt(s, 4) + " dB over " +
              std::to_string(run.proposed.size()) + " test examples; runtime " +
              Fmt(total / 60, 3) + " min (data " + Fmt(run.data_seconds / 60, 3) + ", training " +
              Fmt(run.train_seconds / 60, 3) + ", evaluation " + Fmt(run.eval_seconds / 60, 3) +
              (run.reused_training ? "; data and checkpoint reused from the work directory" : "") +
              ")"};
}

Outcome ParametricCoherence(const DeskRun& run) {
  if (!run.error.empty()) return {false, "desk run failed: " + run.error};
  const double p = Mean(run.parametric, &ExampleMetrics::coherence);
  const double s = Mean(run.stat, &ExampleMetrics::coherence);
  const double seconds = run.static_eval_seconds + run.parametric_eval_seconds;
  return {p > s && seconds < 600, "mean coherence parametric " + Fmt(p, 4) + " vs static " +
                                      Fmt(s, 4) + "; " + Fmt(seconds) + " s"};
}

Outcome AttentionDoa(const DeskRun& run) {
  if (!run.error.empty()) return {false, "desk run failed: " + run.error};
  int within = 0, total = 0;
  std::vector<double> errors;
  for (const auto& m : run.doa) {
    if (m.attention_error_deg < 0) continue;
    ++total;
    errors.push_back(m.attention_error_deg);
    if (m.attention_error_deg <= 30.0) ++within;
  }
  std::sort(errors.begin(), errors.end());
  const double fraction = total ? static_cast<double>(within) / total : 0.0;
  const double median = errors.empty() ? std::nan("") : errors[errors.size() / 2];
  return {total > 0 && fraction >= 0.6,
          std::to_string(within) + "/" + std::to_string(total) +
              " single-source anechoic examples with the attention argmax within 30 deg (" +
              Fmt(100 * fraction) + "%, threshold 60%); median error " + Fmt(median) + " deg"};
}

// ---- 8: parameter count -------------------------------------------------------

Outcome ParameterCount() {
  const nn::Model<float> model(nn::ModelConfig::Paper(), 1);
  const auto n = model.params().NumParameters();
  const double dev = std::abs(n - 890000.0) / 890000.0;
  return {dev <= 0.15, std::to_string(n) + " learnable parameters (C=256, P=4, N=1, F=129, " +
                           "F_H=65), " + Fmt(100 * dev) + "% from 890k"};
}

// ---- 9: ATF import and non-omni pipeline ----------------------------------------

Outcome NonOmniPipeline(const fs::path& work) {
  try {
    const fs::path dir = work / "shadowed";
    fs::remove_all(dir);
    fs::create_directories(dir);
    // Byte-exact import round trip.
    std::mt19937_64 rng(99);
    const auto geometry = SampleArray(rng);
    const auto grid = FibonacciGrid(240);
    const auto shadowed = MakeAtfSet(geometry, grid, 65, 24000, Directivity::kShadowed);
    SaveAtfSet(shadowed, (dir / "a.atf").string());
    const auto loaded = LoadAtfSet((dir / "a.atf").string());
    SaveAtfSet(loaded, (dir / "b.atf").string());
    const bool bytes_equal = ReadBytes(dir / "a.atf") == ReadBytes(dir / "b.atf") &&
                             loaded.values() == shadowed.values();
    const auto free = MakeAtfSet(geometry, grid, 65, 24000, Directivity::kFreeField);
    const bool non_omni = free.values() != shadowed.values();

    // Full pipeline on shadowed ATFs.
    DatasetConfig dc;
    dc.seed = 9;
    dc.clip_seconds = 0.1;
    dc.synthetic_clips = 4;
    dc.synthetic_seconds = 0.5;
    dc.directivity = Directivity::kShadowed;
    dc.splits = {{"train", 2, 2, false, 0}, {"val", 1, 2, false, 0}, {"test", 1, 3, false, 0}};
    const auto data = (dir / "data").string();
    BuildDataset(dc, data, 1);
    TrainConfig tc;
    tc.model.channels = 16;
    tc.model.conv_channels = {8, 16};
    tc.model.norm_groups = 4;
    tc.batch_size = 2;
    tc.max_epochs = 2;
    tc.seed = 9;
    const auto ckpt = (dir / "model.ckpt").string();
    const auto result = Train(tc, data, ckpt);
    const auto test = ReadSplit(data, "test");
    EvalOptions options;
    options.checkpoint = ckpt;
    std::vector<ExampleMetrics> all = Evaluate(Method::kProposed, data, test, options);
    for (auto m : {Method::kStatic, Method::kParametric}) {
      const auto r = Evaluate(m, data, test);
      all.insert(all.end(), r.begin(), r.end());
    }
    bool finite = std::isfinite(result.best_val);
    for (const auto& m : all)
      finite = finite && std::isfinite(m.si_sdr) && std::isfinite(m.coherence) &&
               std::isfinite(m.ms_err);
    WriteReport((dir / "report").string(), all, dc.sample_rate, StftParams{});
    return {bytes_equal && non_omni && finite,
            std::string("ATF round trip ") + (bytes_equal ? "byte-exact" : "NOT byte-exact") +
                "; shadowed ATFs " + (non_omni ? "differ from" : "equal") +
                " free field; trained " + std::to_string(result.steps) + " steps and evaluated " +
                std::to_string(all.size()) + " method-example pairs with " +
                (finite ? "finite" : "NON-FINITE") + " metrics"};
  } catch (const std::exception& e) {
    return {false, std::string("pipeline error: ") + e.what()};
  }
}

}  // namespace

int main(int argc, char** argv) {
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  CLI::App app{"Acceptance checks"};
  std::string work = AMBIX_ACCEPTANCE_WORK;
  std::string configs = AMBIX_CONFIG_DIR;
  bool fresh = false;
  std::vector<int> only;
  app.add_option("--work", work, "Work directory for cached desk artifacts");
  app.add_option("--configs", configs, "Directory with desk_data.json and desk_train.json");
  app.add_flag("--fresh", fresh, "Recompute the cached desk dataset and checkpoint");
  app.add_option("--only", only, "Run only these criteria")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);

  auto wanted = [&](int k) {
    return only.empty() || std::find(only.begin(), only.end(), k) != only.end();
  };
  std::optional<DeskRun> desk;
  auto desk_run = [&]() -> const DeskRun& {
    if (!desk) desk = RunDesk(work, configs, fresh);
    return *desk;
  };
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, GradientCorrectness},
      {2, StftFidelity},
      {3, StaticEncoderOptimality},
      {4, SimulationPhysics},
      {5, [&] { return FreeFieldTrend(desk_run()); }},
      {6, [&] { return ParametricCoherence(desk_run()); }},
      {7, [&] { return AttentionDoa(desk_run()); }},
      {8, ParameterCount},
      {9, [&] { return NonOmniPipeline(work); }},
  };
  bool all = true;
  for (const auto& [k, fn] : criteria) {
    if (!wanted(k)) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    all = all && o.pass;
    std::cout << "criterion " << k << ": " << (o.pass ? "PASS" : "FAIL") << " | " << o.detail
              << std::endl;
  }
  return all ? 0 : 1;
}
