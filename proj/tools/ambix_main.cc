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

// Command-line front end: gen-data, train, eval, encode, plot.

#include <malloc.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <algorithm>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "ambix/atf.h"
#include "ambix/dataset.h"
#include "ambix/dsp.h"
#include "ambix/encoders.h"
#include "ambix/error.h"
#include "ambix/optim.h"
#include "ambix/plot.h"
#include "ambix/spatial.h"
#include "ambix/training.h"
#include "ambix/wav.h"
#include "nlohmann/json.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using ambix::ErrorCode;
using ambix::Require;

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  Require(static_cast<bool>(in), ErrorCode::kConfigError, "cannot open config " + path);
  try {
    return json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    ambix::Fail(ErrorCode::kConfigError, path + ": " + e.what());
  }
}

// Seed precedence: config < AMBIX_SEED < --seed.
std::uint64_t ResolveSeed(std::uint64_t config_seed, const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("AMBIX_SEED")) {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    Require(end && *end == '\0' && end != env, ErrorCode::kConfigError,
            std::string("AMBIX_SEED is not an unsigned integer: ") + env);
    return v;
  }
  return config_seed;
}

std::vector<std::vector<std::string>> ReadCsv(const std::string& path, std::vector<std::string>* header) {
  std::ifstream in(path);
  Require(static_cast<bool>(in), ErrorCode::kIoError, "cannot open " + path);
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
  };
  std::string line;
  Require(static_cast<bool>(std::getline(in, line)), ErrorCode::kFormatError, path + " is empty");
  *header = split(line);
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(split(line));
  for (const auto& r : rows)
    Require(r.size() == header->size(), ErrorCode::kFormatError, path + ": ragged row");
  return rows;
}

void ExpectHeader(const std::string& path, const std::vector<std::string>& expected) {
  std::vector<std::string> header;
  ReadCsv(path, &header);
  Require(header == expected, ErrorCode::kFormatError, path + ": unexpected CSV header");
}

double ToDouble(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    Require(pos == s.size(), ErrorCode::kFormatError, where + ": bad number " + s);
    return v;
  } catch (const std::logic_error&) {
    ambix::Fail(ErrorCode::kFormatError, where + ": bad number \"" + s + "\"");
  }
}

void EnsureParent(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  Require(!ec, ErrorCode::kIoError, "cannot create " + parent.string() + ": " + ec.message());
}

// ---- gen-data ---------------------------------------------------------------

struct GenArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  bool self_check = false;
};

void SelfCheckDataset(const std::string& root, const ambix::DatasetConfig& config) {
  std::vector<ambix::ExampleRecord> all;
  for (const auto& split : config.splits) {
    const auto records = ambix::ReadSplit(root, split.name);
    Require(static_cast<int>(records.size()) == split.scenes * split.arrays,
            ErrorCode::kFormatError, "manifest " + split.name + " has the wrong example count");
    for (const auto& r : records) {
      for (const auto& rel : {r.atf, r.mic, r.ref})
        Require(fs::is_regular_file(fs::path(root) / rel), ErrorCode::kFormatError,
                r.id + ": missing " + rel);
    }
    all.insert(all.end(), records.begin(), records.end());
  }
  const auto overlap = ambix::AuditSplits(all);
  Require(overlap.empty(), ErrorCode::kFormatError, "split audit: " + overlap);
  // Spot-check the first example of every split end to end.
  for (const auto& split : config.splits) {
    const auto records = ambix::ReadSplit(root, split.name);
    const auto ex = ambix::LoadExample(root, records.front());
    Require(static_cast<int>(ex.reference.num_channels()) == ambix::ShChannelCount(config.order),
            ErrorCode::kFormatError, records.front().id + ": reference channel count");
  }
}

int GenData(const GenArgs& a) {
  auto config = ambix::DatasetConfig::FromJson(ReadJsonFile(a.config));
  config.seed = ResolveSeed(config.seed, a.seed);
  const auto examples = ambix::BuildDataset(config, a.out, a.jobs);
  std::cout << "wrote " << examples.size() << " examples to " << a.out << '\n';
  if (a.self_check) {
    SelfCheckDataset(a.out, config);
    std::cout << "self-check passed\n";
  }
  return 0;
}

// ---- train ------------------------------------------------------------------

struct TrainArgs {
  std::string config, data, out;
  bool resume = false, self_check = false, quiet = false;
};

int Train(const TrainArgs& a) {
  auto config = ambix::TrainConfig::FromJson(ReadJsonFile(a.config));
  config.seed = ResolveSeed(config.seed, std::nullopt);
  EnsureParent(a.out);
  ambix::TrainOptions options;
  options.resume = a.resume;
  if (!a.quiet) options.progress = [](const std::string& s) { std::cout << s << std::endl; };
  const auto result = ambix::Train(config, a.data, a.out, options);
  std::cout << "steps " << result.steps << ", best val " << result.best_val << " at epoch "
            << result.best_epoch << (result.early_stopped ? " (early stop)" : "") << '\n';
  if (a.self_check) {
    const auto header = ambix::nn::ReadCheckpointHeader(a.out);
    Require(header.contains("extra") && header["extra"].contains("model"), ErrorCode::kFormatError,
            a.out + ": checkpoint header lacks the model configuration");
    ambix::LoadModel(a.out);
    ExpectHeader(a.out + ".log.csv", {"epoch", "train_loss", "val_loss", "seconds"});
    std::cout << "self-check passed\n";
  }
  return 0;
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
  std::vector<std::string> ckpt;
  std::string data, report, split = "test";
  int jobs = 1;
  bool self_check = false;
};

int Eval(const EvalArgs& a) {
  const auto examples = ambix::ReadSplit(a.data, a.split);
  Require(!examples.empty(), ErrorCode::kConfigError, "split " + a.split + " is empty");
  std::vector<ambix::ExampleMetrics> all;
  for (const auto& c : a.ckpt) {
    ambix::EvalOptions options;
    options.jobs = a.jobs;
    ambix::Method method = ambix::Method::kProposed;
    if (c == "static") {
      method = ambix::Method::kStatic;
    } else if (c == "parametric") {
      method = ambix::Method::kParametric;
    } else {
      options.checkpoint = c;
      options.attention_dir = (fs::path(a.report) / "attention").string();
    }
    auto m = ambix::Evaluate(method, a.data, examples, options);
    all.insert(all.end(), m.begin(), m.end());
  }
  const int rate = ambix::ReadWav((fs::path(a.data) / examples.front().mic).string()).sample_rate;
  ambix::StftParams params;
  params.sample_rate = rate;
  ambix::WriteReport(a.report, all, rate, params);
  std::ifstream summary(fs::path(a.report) / "summary.txt");
  std::cout << summary.rdbuf();
  if (a.self_check) {
    std::vector<std::string> header;
    const auto rows = ReadCsv((fs::path(a.report) / "metrics.csv").string(), &header);
    Require(header == std::vector<std::string>{"example_id", "method", "si_sdr", "coh", "ms_err"},
            ErrorCode::kFormatError, "metrics.csv header");
    Require(rows.size() == all.size(), ErrorCode::kFormatError, "metrics.csv row count");
    for (const auto& r : rows) {
      for (int k = 2; k < 5; ++k)
        Require(std::isfinite(ToDouble(r[k], "metrics.csv")), ErrorCode::kFormatError,
                "metrics.csv: non-finite value for " + r[0]);
      const double coh = ToDouble(r[3], "metrics.csv");
      Require(coh >= 0 && coh <= 1 + 1e-9, ErrorCode::kFormatError, "coherence outside [0, 1]");
    }
    const auto table = ReadCsv((fs::path(a.report) / "table.csv").string(), &header);
    Require(header == std::vector<std::string>{"method", "si_sdr", "coh", "ms_err"},
            ErrorCode::kFormatError, "table.csv header");
    Require(table.size() == a.ckpt.size(), ErrorCode::kFormatError, "table.csv row count");
    ExpectHeader((fs::path(a.report) / "mag_err.csv").string(), {"method", "freq_hz", "ms_err_db"});
    std::ifstream js(fs::path(a.report) / "summary.json");
    const json summary_json = json::parse(js);
    Require(summary_json.is_object(), ErrorCode::kFormatError, "summary.json is not an object");
    std::cout << "self-check passed\n";
  }
  return 0;
}

// ---- encode -----------------------------------------------------------------

struct EncodeArgs {
  std::string ckpt, atf, in, out;
  int order = 1;
  bool self_check = false;
};

int Encode(const EncodeArgs& a) {
  const auto mic = ambix::ReadWav(a.in);
  const auto atfs = ambix::LoadAtfSet(a.atf);
  Require(static_cast<int>(mic.num_channels()) == atfs.mics(), ErrorCode::kConfigError,
          a.in + " has " + std::to_string(mic.num_channels()) + " channels but the ATF set has " +
              std::to_string(atfs.mics()) + " microphones");
  Require(mic.sample_rate == atfs.sample_rate(), ErrorCode::kConfigError,
          "sample rate " + std::to_string(mic.sample_rate) + " differs from the ATF set's " +
              std::to_string(atfs.sample_rate()));
  ambix::AudioBuffer out;
  if (a.ckpt == "static") {
    ambix::StftParams params;
    params.sample_rate = mic.sample_rate;
    const auto enc = ambix::ComputeStaticEncoder(atfs, a.order);
    out = ambix::Istft(ambix::ApplyStatic(enc, ambix::Stft(mic, params)), mic.num_samples());
  } else {
    const auto model = ambix::LoadModel(a.ckpt);
    out = ambix::EncodeWithModel(model, mic, atfs);
  }
  out.sample_rate = mic.sample_rate;
  EnsureParent(a.out);
  ambix::WriteWav(a.out, out, "ambisonics ACN/N3D");
  std::cout << "wrote " << out.num_channels() << " channels, " << out.num_samples()
            << " samples to " << a.out << '\n';
  if (a.self_check) {
    ambix::WavInfo info;
    const auto back = ambix::ReadWav(a.out, &info);
    Require(info.format_tag == 3 && info.bits == 32, ErrorCode::kFormatError,
            "output is not 32-bit float");
    Require(info.comment.find("ACN/N3D") != std::string::npos, ErrorCode::kFormatError,
            "output lacks the ACN/N3D tag");
    Require(back.num_samples() == mic.num_samples(), ErrorCode::kFormatError,
            "output length differs from input");
    std::cout << "self-check passed\n";
  }
  return 0;
}

// ---- plot -------------------------------------------------------------------

struct PlotArgs {
  std::string kind, report, out, example;
  bool self_check = false;
};

int Plot(const PlotArgs& a) {
  const fs::path report(a.report);
  const fs::path out(a.out);
  const fs::path csv_path = fs::path(out).replace_extension(".csv");
  const fs::path svg_path = fs::path(out).replace_extension(".svg");
  EnsureParent(a.out);
  if (a.kind == "attn") {
    const fs::path dir = report / "attention";
    Require(fs::is_directory(dir), ErrorCode::kConfigError,
            "no attention maps in " + dir.string() + " (evaluate a checkpoint first)");
    fs::path source;
    if (!a.example.empty()) {
      source = dir / (a.example + ".csv");
    } else {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".csv") files.push_back(e.path());
      Require(!files.empty(), ErrorCode::kConfigError, "no attention maps in " + dir.string());
      std::sort(files.begin(), files.end());
      source = files.front();
    }
    std::vector<std::string> header;
    const auto rows = ReadCsv(source.string(), &header);
    Require(header == std::vector<std::string>{"azimuth", "colatitude", "weight"},
            ErrorCode::kFormatError, source.string() + ": unexpected header");
    fs::copy_file(source, csv_path, fs::copy_options::overwrite_existing);
    ambix::HeatPlot plot;
    plot.title = "Mean attention over time and frequency: " + source.stem().string();
    plot.x_label = "azimuth [deg]";
    plot.y_label = "colatitude [deg]";
    for (const auto& r : rows) {
      plot.x.push_back(ToDouble(r[0], source.string()));
      plot.y.push_back(ToDouble(r[1], source.string()));
      plot.value.push_back(ToDouble(r[2], source.string()));
    }
    ambix::WriteTextFile(svg_path.string(), ambix::RenderHeatPlot(plot));
    if (a.self_check) {
      double sum = 0;
      for (double v : plot.value) sum += v;
      Require(std::abs(sum - 1.0) <= 1e-6, ErrorCode::kFormatError,
              "attention weights sum to " + std::to_string(sum));
    }
  } else if (a.kind == "mag-err") {
    std::vector<std::string> header;
    const auto src = (report / "mag_err.csv").string();
    const auto rows = ReadCsv(src, &header);
    Require(header == std::vector<std::string>{"method", "freq_hz", "ms_err_db"},
            ErrorCode::kFormatError, src + ": unexpected header");
    fs::copy_file(src, csv_path, fs::copy_options::overwrite_existing);
    ambix::LinePlot plot;
    plot.title = "Magnitude response error";
    plot.x_label = "frequency [Hz]";
    plot.y_label = "error [dB]";
    plot.log_x = true;
    std::map<std::string, std::size_t> index;
    for (const auto& r : rows) {
      if (!index.contains(r[0])) {
        index[r[0]] = plot.series.size();
        plot.series.push_back({r[0], {}, {}});
      }
      auto& s = plot.series[index[r[0]]];
      s.x.push_back(ToDouble(r[1], src));
      s.y.push_back(ToDouble(r[2], src));
    }
    ambix::WriteTextFile(svg_path.string(), ambix::RenderLinePlot(plot));
  } else {
    ambix::Fail(ErrorCode::kConfigError, "unknown plot kind \"" + a.kind + "\" (attn, mag-err)");
  }
  std::cout << "wrote " << csv_path.string() << " and " << svg_path.string() << '\n';
  if (a.self_check) {
    std::ifstream svg(svg_path);
    std::string text((std::istreambuf_iterator<char>(svg)), {});
    Require(text.rfind("<svg", 0) == 0 && text.find("</svg>") != std::string::npos,
            ErrorCode::kFormatError, "malformed SVG");
    std::cout << "self-check passed\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  // Training allocates and frees the same large activation buffers every
  // step; keeping them in the heap avoids repeated page faults.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);

  CLI::App app{"Microphone array to Ambisonics encoding: data, training, evaluation"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen-data", "Simulate scenes and write a dataset with manifests");
  g->add_option("--config", gen.config, "Dataset config (JSON)")->required();
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("--seed", gen.seed, "Override the config seed");
  g->add_option("--jobs", gen.jobs, "Worker threads")->check(CLI::PositiveNumber);
  g->add_flag("--self-check", gen.self_check, "Validate the emitted files");

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train the model with early stopping");
  t->add_option("--config", train.config, "Training config (JSON)")->required();
  t->add_option("--data", train.data, "Dataset directory")->required();
  t->add_option("--out", train.out, "Checkpoint path")->required();
  t->add_flag("--resume", train.resume, "Continue from <out>.last");
  t->add_flag("--quiet", train.quiet, "Suppress progress lines");
  t->add_flag("--self-check", train.self_check, "Validate the emitted files");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate checkpoints and baselines on a split");
  e->add_option("--ckpt", ev.ckpt, "Checkpoint path, \"static\" or \"parametric\" (repeatable)")
      ->required();
  e->add_option("--data", ev.data, "Dataset directory")->required();
  e->add_option("--report", ev.report, "Report directory")->required();
  e->add_option("--split", ev.split, "Split to evaluate");
  e->add_option("--jobs", ev.jobs, "Worker threads")->check(CLI::PositiveNumber);
  e->add_flag("--self-check", ev.self_check, "Validate the emitted files");

  EncodeArgs enc;
  auto* en = app.add_subcommand("encode", "Encode a microphone recording to Ambisonics");
  en->add_option("--ckpt", enc.ckpt, "Checkpoint path or \"static\"")->required();
  en->add_option("--atf", enc.atf, "ATF set of the array")->required();
  en->add_option("--in", enc.in, "Input WAV with one channel per microphone")->required();
  en->add_option("--out", enc.out, "Output WAV (32-bit float, ACN/N3D)")->required();
  en->add_option("--order", enc.order, "Ambisonic order for the static encoder");
  en->add_flag("--self-check", enc.self_check, "Validate the emitted file");

  PlotArgs plot;
  auto* p = app.add_subcommand("plot", "Emit CSV and SVG plots from an evaluation report");
  p->add_option("--kind", plot.kind, "attn or mag-err")->required();
  p->add_option("--report", plot.report, "Report directory")->required();
  p->add_option("--out", plot.out, "Output path; .csv and .svg are written")->required();
  p->add_option("--example", plot.example, "Example id for attention maps");
  p->add_flag("--self-check", plot.self_check, "Validate the emitted files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitConfig;
  }
  try {
    if (*g) return GenData(gen);
    if (*t) return Train(train);
    if (*e) return Eval(ev);
    if (*en) return Encode(enc);
    if (*p) return Plot(plot);
  } catch (const ambix::Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return err.code() == ErrorCode::kNumericalError ? kExitNumeric : kExitConfig;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
