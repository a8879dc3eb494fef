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

#include "ambix/training.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include "ambix/encoders.h"
#include "ambix/error.h"
#include "ambix/metrics.h"
#include "ambix/ops.h"
#include "ambix/optim.h"
#include "ambix/parallel.h"
#include "ambix/spatial.h"

namespace ambix {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nn::Tensor;

std::uint64_t Mix64(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Tensor<float> AudioTensor(const AudioBuffer& a) {
  const auto c = static_cast<std::int64_t>(a.num_channels());
  const auto n = static_cast<std::int64_t>(a.num_samples());
  std::vector<float> v(c * n);
  for (std::int64_t i = 0; i < c; ++i)
    for (std::int64_t j = 0; j < n; ++j) v[i * n + j] = static_cast<float>(a.channels[i][j]);
  return Tensor<float>::Constant({c, n}, std::move(v));
}

AudioBuffer TensorAudio(const Tensor<float>& t, int sample_rate) {
  AudioBuffer a(t.dim(0), t.dim(1), sample_rate);
  for (std::int64_t i = 0; i < t.dim(0); ++i)
    for (std::int64_t j = 0; j < t.dim(1); ++j) a.channels[i][j] = t.value()[i * t.dim(1) + j];
  return a;
}

double Finite(double v) { return std::isfinite(v) ? v : std::numeric_limits<double>::quiet_NaN(); }

json LogJson(const std::vector<EpochLog>& log) {
  json j = json::array();
  for (const auto& e : log)
    j.push_back({{"epoch", e.epoch},
                 {"train_loss", std::isfinite(e.train_loss) ? json(e.train_loss) : json(nullptr)},
                 {"val_loss", e.val_loss},
                 {"seconds", e.seconds}});
  return j;
}

std::vector<EpochLog> LogFromJson(const json& j) {
  std::vector<EpochLog> log;
  for (const auto& e : j)
    log.push_back({e.at("epoch").get<int>(),
                   e.at("train_loss").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                : e.at("train_loss").get<double>(),
                   e.at("val_loss").get<double>(), e.at("seconds").get<double>()});
  return log;
}

void WriteLogCsv(const std::string& path, const std::vector<EpochLog>& log) {
  std::ofstream out(path);
  Require(static_cast<bool>(out), ErrorCode::kIoError, "cannot write " + path);
  out << "epoch,train_loss,val_loss,seconds\n" << std::setprecision(9);
  for (const auto& e : log) {
    out << e.epoch << ',';
    if (std::isfinite(e.train_loss)) out << e.train_loss;
    out << ',' << e.val_loss << ',' << e.seconds << '\n';
  }
}

int OrderFromChannels(std::size_t channels) {
  const int order = static_cast<int>(std::lround(std::sqrt(static_cast<double>(channels)))) - 1;
  Require(ShChannelCount(order) == static_cast<int>(channels), ErrorCode::kFormatError,
          "reference channel count " + std::to_string(channels) + " is not (N+1)^2");
  return order;
}

}  // namespace

void TrainConfig::Validate() const {
  auto check = [](bool ok, const std::string& what) {
    Require(ok, ErrorCode::kConfigError, "train config: " + what);
  };
  check(batch_size >= 1, "batch_size must be >= 1");
  check(lr >= 0, "lr must be >= 0");
  check(max_epochs >= 1, "max_epochs must be >= 1");
  check(patience >= 1, "patience must be >= 1");
  check(max_steps >= 0, "max_steps must be >= 0");
  check(max_train_examples >= 0, "max_train_examples must be >= 0");
  model.Validate();
}

json TrainConfig::ToJson() const {
  return {{"batch_size", batch_size},       {"lr", lr},
          {"max_epochs", max_epochs},       {"patience", patience},
          {"max_steps", max_steps},         {"seed", seed},
          {"train_split", train_split},     {"val_split", val_split},
          {"max_train_examples", max_train_examples},
          {"freeze", freeze},               {"model", model.ToJson()}};
}

TrainConfig TrainConfig::FromJson(const json& j) {
  Require(j.is_object(), ErrorCode::kConfigError, "train config must be a JSON object");
  TrainConfig c;
  for (const auto& [k, v] : j.items()) {
    try {
      if (k == "batch_size") c.batch_size = v.get<int>();
      else if (k == "lr") c.lr = v.get<double>();
      else if (k == "max_epochs") c.max_epochs = v.get<int>();
      else if (k == "patience") c.patience = v.get<int>();
      else if (k == "max_steps") c.max_steps = v.get<std::int64_t>();
      else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else if (k == "train_split") c.train_split = v.get<std::string>();
      else if (k == "val_split") c.val_split = v.get<std::string>();
      else if (k == "max_train_examples") c.max_train_examples = v.get<int>();
      else if (k == "freeze") c.freeze = v.get<bool>();
      else if (k == "model") {
        // Model keys override the desk-scale defaults.
        json merged = nn::ModelConfig::Desk().ToJson();
        Require(v.is_object(), ErrorCode::kConfigError, "train config: model must be an object");
        for (const auto& [mk, mv] : v.items()) {
          Require(merged.contains(mk), ErrorCode::kConfigError,
                  "unknown model config key \"" + mk + "\"");
          merged[mk] = mv;
        }
        c.model = nn::ModelConfig::FromJson(merged);
      } else {
        Fail(ErrorCode::kConfigError, "unknown train config key \"" + k + "\"");
      }
    } catch (const json::exception& e) {
      Fail(ErrorCode::kConfigError, "train config key \"" + k + "\": " + e.what());
    }
  }
  c.Validate();
  return c;
}

ModelInputs PrepareInputs(const nn::ModelConfig& config, const AudioBuffer& mic,
                          const AtfSet& atfs) {
  Require(atfs.mics() == config.mics && static_cast<int>(mic.num_channels()) == config.mics,
          ErrorCode::kShapeError,
          "model expects " + std::to_string(config.mics) + " microphones, got " +
              std::to_string(mic.num_channels()) + " channels and " +
              std::to_string(atfs.mics()) + " ATF rows");
  Require(atfs.bins() == config.atf_bins, ErrorCode::kShapeError,
          "model expects " + std::to_string(config.atf_bins) + " ATF bins, got " +
              std::to_string(atfs.bins()));
  auto params = config.stft();
  params.sample_rate = mic.sample_rate;
  return {nn::SpectrogramTensor<float>(Stft(mic, params)), nn::AtfTensor<float>(atfs),
          mic.num_samples()};
}

nn::Model<float> LoadModel(const std::string& checkpoint) {
  const auto header = nn::ReadCheckpointHeader(checkpoint);
  Require(header.contains("extra") && header["extra"].contains("model"), ErrorCode::kFormatError,
          checkpoint + " does not carry a model configuration");
  nn::Model<float> model(nn::ModelConfig::FromJson(header["extra"]["model"]), 0);
  nn::LoadCheckpoint(model.params(), checkpoint);
  return model;
}

TrainResult Train(const TrainConfig& config, const std::string& data_dir,
                  const std::string& checkpoint, const TrainOptions& options) {
  config.Validate();
  auto say = [&](const std::string& s) {
    if (options.progress) options.progress(s);
  };
  auto train = ReadSplit(data_dir, config.train_split);
  const auto val = ReadSplit(data_dir, config.val_split);
  if (config.max_train_examples > 0 && static_cast<int>(train.size()) > config.max_train_examples)
    train.resize(config.max_train_examples);
  Require(!train.empty() && !val.empty(), ErrorCode::kConfigError,
          "training and validation splits must be nonempty");

  nn::Model<float> model(config.model, config.seed);
  auto& params = model.params();
  const std::string last = checkpoint + ".last";

  auto load = [&](const ExampleRecord& r) {
    const auto ex = LoadExample(data_dir, r);
    auto in = PrepareInputs(config.model, ex.mic, ex.atfs);
    Require(ex.reference.num_channels() == static_cast<std::size_t>(config.model.ambi_channels()),
            ErrorCode::kShapeError, r.id + ": reference channels do not match the model order");
    return std::make_pair(std::move(in), AudioTensor(ex.reference));
  };
  TrainResult result;
  int epoch = 0, batch_index = 0, bad_epochs = 0;

  // Writes <checkpoint>.nan.json describing the failing step and raises.
  auto abort_non_finite = [&](const std::string& phase, int b,
                              const std::vector<std::string>& ids, double loss,
                              const std::string& detail) {
    const std::string dump = checkpoint + ".nan.json";
    std::ofstream(dump) << json{{"phase", phase},      {"step", result.steps},
                                {"epoch", epoch},      {"batch", b},
                                {"seed", config.seed}, {"examples", ids},
                                {"loss", Finite(loss)}, {"detail", detail}}
                               .dump(2)
                        << '\n';
    Fail(ErrorCode::kNumericalError, "non-finite " + phase + " at step " +
                                         std::to_string(result.steps) + " (" + detail +
                                         "); diagnostics in " + dump);
  };
  auto validate = [&]() {
    double total = 0.0;
    for (const auto& r : val) {
      double loss = 0.0;
      try {
        const auto [in, ref] = load(r);
        const auto out = model.Forward(in.x, in.h, in.length);
        loss = nn::MseLoss(out.signal.Detach(), ref).item();
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNumericalError) throw;
        abort_non_finite("validation", -1, {r.id}, loss, e.what());
      }
      if (!std::isfinite(loss)) abort_non_finite("validation", -1, {r.id}, loss, "loss");
      total += loss;
    }
    return total / val.size();
  };
  double epoch_loss = 0.0;
  int epoch_batches = 0;
  auto extra = [&]() {
    return json{{"model", config.model.ToJson()}, {"train", config.ToJson()},
                {"epoch", epoch},                 {"batch", batch_index},
                {"best_val", result.best_val},    {"best_epoch", result.best_epoch},
                {"bad_epochs", bad_epochs},       {"steps", result.steps},
                {"epoch_loss", epoch_loss},       {"epoch_batches", epoch_batches},
                {"log", LogJson(result.log)}};
  };

  if (options.resume) {
    const auto state = nn::LoadCheckpoint(params, last);
    Require(state.at("model") == config.model.ToJson(), ErrorCode::kConfigError,
            "resume: model configuration differs from " + last);
    epoch = state.at("epoch");
    batch_index = state.at("batch");
    result.best_val = state.at("best_val");
    result.best_epoch = state.at("best_epoch");
    bad_epochs = state.at("bad_epochs");
    result.steps = state.at("steps");
    epoch_loss = state.at("epoch_loss");
    epoch_batches = state.at("epoch_batches");
    result.log = LogFromJson(state.at("log"));
    say("resumed at epoch " + std::to_string(epoch) + ", step " + std::to_string(result.steps));
  } else {
    const auto t0 = std::chrono::steady_clock::now();
    result.best_val = validate();
    result.log.push_back({0, std::numeric_limits<double>::quiet_NaN(), result.best_val,
                          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()});
    say("epoch 0 val " + std::to_string(result.best_val));
    nn::SaveCheckpoint(params, checkpoint, extra());
    WriteLogCsv(checkpoint + ".log.csv", result.log);
  }

  const int batches = static_cast<int>((train.size() + config.batch_size - 1) / config.batch_size);
  nn::AdamOptions adam;
  adam.lr = config.lr;
  const bool mid_epoch = batch_index > 0;
  for (int e = mid_epoch ? epoch : epoch + 1; e <= config.max_epochs; ++e) {
    if (bad_epochs >= config.patience) break;
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<int> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 shuffle(Mix64(config.seed, 1000 + e));
    std::shuffle(order.begin(), order.end(), shuffle);
    epoch = e;
    for (int b = batch_index; b < batches; ++b) {
      const int first = b * config.batch_size;
      const int count = std::min<int>(config.batch_size, static_cast<int>(train.size()) - first);
      params.ZeroGrad();
      double batch_loss = 0.0;
      std::vector<std::string> ids;
      for (int k = 0; k < count; ++k) {
        const auto& r = train[order[first + k]];
        ids.push_back(r.id);
        try {
          const auto [in, ref] = load(r);
          std::mt19937_64 drop(Mix64(Mix64(config.seed, result.steps), k));
          const auto out = model.Forward(in.x, in.h, in.length, true, &drop);
          const auto loss = nn::MseLoss(out.signal, ref);
          batch_loss += loss.item() / count;
          nn::Backward(nn::Scale(loss, 1.0f / count));
        } catch (const Error& err) {
          if (err.code() != ErrorCode::kNumericalError) throw;
          abort_non_finite("training step", b, ids, batch_loss, err.what());
        }
      }
      if (!std::isfinite(batch_loss) || !params.AllFinite())
        abort_non_finite("training step", b, ids, batch_loss, "loss or gradient");
      if (!config.freeze) nn::AdamStep(params, adam);
      ++result.steps;
      result.step_losses.push_back(batch_loss);
      epoch_loss += batch_loss;
      ++epoch_batches;
      batch_index = b + 1;
      if (result.steps % 10 == 0)
        say("epoch " + std::to_string(e) + " step " + std::to_string(result.steps) + " loss " +
            std::to_string(batch_loss));
      if (config.max_steps > 0 && result.steps >= config.max_steps && batch_index < batches) {
        nn::SaveCheckpoint(params, last, extra());
        return result;
      }
    }
    const double val_loss = validate();
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.log.push_back({e, epoch_loss / std::max(1, epoch_batches), val_loss, seconds});
    epoch_loss = 0.0;
    epoch_batches = 0;
    batch_index = 0;
    if (val_loss < result.best_val) {
      result.best_val = val_loss;
      result.best_epoch = e;
      bad_epochs = 0;
      nn::SaveCheckpoint(params, checkpoint, extra());
    } else {
      ++bad_epochs;
    }
    say("epoch " + std::to_string(e) + " train " + std::to_string(result.log.back().train_loss) +
        " val " + std::to_string(val_loss) + (bad_epochs ? "" : " (best)"));
    nn::SaveCheckpoint(params, last, extra());
    WriteLogCsv(checkpoint + ".log.csv", result.log);
    if (config.max_steps > 0 && result.steps >= config.max_steps) return result;
  }
  result.early_stopped = bad_epochs >= config.patience;
  result.finished = true;
  return result;
}

AudioBuffer EncodeWithModel(const nn::Model<float>& model, const AudioBuffer& mic,
                            const AtfSet& atfs, Tensor<float>* attention) {
  const auto in = PrepareInputs(model.config(), mic, atfs);
  const auto out = model.Forward(in.x, in.h, in.length);
  if (attention) *attention = out.attention;
  return TensorAudio(out.signal, mic.sample_rate);
}

std::string MethodName(Method m) {
  switch (m) {
    case Method::kProposed: return "proposed";
    case Method::kStatic: return "static";
    case Method::kParametric: return "parametric";
  }
  return "?";
}

std::vector<ExampleMetrics> Evaluate(Method method, const std::string& data_dir,
                                     const std::vector<ExampleRecord>& examples,
                                     const EvalOptions& options) {
  std::optional<nn::Model<float>> model;
  if (method == Method::kProposed) {
    Require(!options.checkpoint.empty() && fs::is_regular_file(options.checkpoint),
            ErrorCode::kConfigError, "checkpoint \"" + options.checkpoint + "\" not found");
    model.emplace(LoadModel(options.checkpoint));
  }
  if (!options.attention_dir.empty()) fs::create_directories(options.attention_dir);
  std::vector<ExampleMetrics> results(examples.size());
  ParallelFor(static_cast<int>(examples.size()), options.jobs, [&](int i) {
    const auto& r = examples[i];
    const auto ex = LoadExample(data_dir, r);
    StftParams params;
    params.sample_rate = ex.mic.sample_rate;
    const int order = OrderFromChannels(ex.reference.num_channels());
    AudioBuffer estimate;
    ExampleMetrics m;
    m.id = r.id;
    m.method = MethodName(method);
    if (method == Method::kProposed) {
      Tensor<float> attention;
      estimate = EncodeWithModel(*model, ex.mic, ex.atfs, &attention);
      params = model->config().stft();
      params.sample_rate = ex.mic.sample_rate;
      if (r.sources.size() == 1) {
        const auto mean = nn::MeanAttention(attention);
        const auto best = std::max_element(mean.begin(), mean.end()) - mean.begin();
        const auto& grid = ex.atfs.grid();
        m.attention_error_deg = AngularDistance(grid[best], Direction::FromUnit(r.sources[0].doa)) *
                                180.0 / std::numbers::pi;
        if (!options.attention_dir.empty()) {
          std::ofstream out(fs::path(options.attention_dir) / (r.id + ".csv"));
          out << "azimuth,colatitude,weight\n" << std::setprecision(9);
          for (std::size_t d = 0; d < mean.size(); ++d)
            out << grid[d].azimuth * 180.0 / std::numbers::pi << ','
                << grid[d].colatitude * 180.0 / std::numbers::pi << ',' << mean[d] << '\n';
          Require(static_cast<bool>(out), ErrorCode::kIoError, "failed writing attention CSV");
        }
      }
    } else {
      const auto enc = ComputeStaticEncoder(ex.atfs, order);
      const auto x = Stft(ex.mic, params);
      if (method == Method::kStatic) {
        estimate = Istft(ApplyStatic(enc, x), ex.mic.num_samples());
      } else {
        std::vector<Eigen::Vector3d> doas;
        for (const auto& s : r.sources) doas.push_back(s.doa);
        const auto track = OracleDoaTrack::Constant(doas, x.frames());
        estimate = Istft(ParametricOracle(x, ex.atfs, track, order, enc), ex.mic.num_samples());
      }
    }
    estimate.sample_rate = ex.reference.sample_rate;
    const auto report = ComputeMetrics(estimate, ex.reference, params);
    m.si_sdr = report.si_sdr.mean;
    m.coherence = report.coherence;
    m.ms_err = report.ms_err;
    m.ms_err_by_bin = MagnitudeErrorByBin(Stft(estimate, params), Stft(ex.reference, params));
    results[i] = std::move(m);
  });
  return results;
}

void WriteReport(const std::string& dir, const std::vector<ExampleMetrics>& metrics,
                 int sample_rate, const StftParams& params) {
  fs::create_directories(dir);
  const fs::path base(dir);
  auto open = [&](const char* name) {
    std::ofstream out(base / name);
    Require(static_cast<bool>(out), ErrorCode::kIoError, "cannot write " + (base / name).string());
    out << std::setprecision(9);
    return out;
  };
  struct Agg {
    int n = 0;
    double si_sdr = 0, coh = 0, ms_err = 0;
    std::vector<double> by_bin;
    std::vector<double> attn;
  };
  std::vector<std::string> order;
  std::map<std::string, Agg> agg;
  {
    auto out = open("metrics.csv");
    out << "example_id,method,si_sdr,coh,ms_err\n";
    for (const auto& m : metrics) {
      out << m.id << ',' << m.method << ',' << m.si_sdr << ',' << m.coherence << ',' << m.ms_err
          << '\n';
      if (!agg.contains(m.method)) order.push_back(m.method);
      auto& a = agg[m.method];
      ++a.n;
      a.si_sdr += m.si_sdr;
      a.coh += m.coherence;
      a.ms_err += m.ms_err;
      if (a.by_bin.empty()) a.by_bin.assign(m.ms_err_by_bin.size(), 0.0);
      for (std::size_t f = 0; f < std::min(a.by_bin.size(), m.ms_err_by_bin.size()); ++f)
        a.by_bin[f] += m.ms_err_by_bin[f];
      if (m.attention_error_deg >= 0) a.attn.push_back(m.attention_error_deg);
    }
  }
  json summary = json::object();
  auto table = open("table.csv");
  table << "method,si_sdr,coh,ms_err\n";
  auto text = open("summary.txt");
  text << std::fixed << std::setprecision(2);
  text << "Method        SI-SDR [dB]   Coh.    MS err [dB]   N\n";
  auto mag = open("mag_err.csv");
  mag << "method,freq_hz,ms_err_db\n";
  for (const auto& name : order) {
    const auto& a = agg[name];
    const double si = a.si_sdr / a.n, coh = a.coh / a.n, ms = a.ms_err / a.n;
    table << name << ',' << si << ',' << coh << ',' << ms << '\n';
    text << std::left << std::setw(14) << name << std::right << std::setw(11) << si
         << std::setw(9) << coh << std::setw(13) << ms << std::setw(5) << a.n << '\n';
    json entry = {{"examples", a.n}, {"si_sdr", si}, {"coh", coh}, {"ms_err", ms}};
    if (!a.attn.empty()) {
      const auto within = std::count_if(a.attn.begin(), a.attn.end(), [](double e) { return e <= 30.0; });
      auto sorted = a.attn;
      std::sort(sorted.begin(), sorted.end());
      entry["attention"] = {{"examples", sorted.size()},
                            {"within_30deg", static_cast<double>(within) / sorted.size()},
                            {"median_error_deg", sorted[sorted.size() / 2]}};
      text << "  attention argmax within 30 deg: " << within << "/" << sorted.size() << '\n';
    }
    summary[name] = entry;
    for (std::size_t f = 0; f < a.by_bin.size(); ++f)
      mag << name << ',' << f * static_cast<double>(sample_rate) / params.fft_size << ','
          << a.by_bin[f] / a.n << '\n';
  }
  open("summary.json") << summary.dump(2) << '\n';
}

}  // namespace ambix
