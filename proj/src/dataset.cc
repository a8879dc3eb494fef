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

#include "ambix/dataset.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "ambix/container.h"
#include "ambix/error.h"
#include "ambix/parallel.h"
#include "ambix/render.h"
#include "ambix/spatial.h"
#include "ambix/wav.h"

namespace ambix {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
constexpr double kPi = std::numbers::pi;

std::uint64_t SplitMix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t DeriveSeed(std::uint64_t seed, const std::string& tag, std::uint64_t a,
                         std::uint64_t b = 0) {
  std::uint64_t h = SplitMix(seed);
  for (unsigned char c : tag) h = SplitMix(h ^ c);
  return SplitMix(SplitMix(h ^ a) ^ b);
}

double Rms(std::span<const double> x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return x.empty() ? 0.0 : std::sqrt(e / x.size());
}

// RBJ biquad, direct form I.
class Biquad {
 public:
  static Biquad BandPass(double f0, double q, double fs) {
    const double w = 2 * kPi * f0 / fs, alpha = std::sin(w) / (2 * q);
    return Biquad(alpha, 0, -alpha, 1 + alpha, -2 * std::cos(w), 1 - alpha);
  }
  static Biquad LowPass(double f0, double q, double fs) {
    const double w = 2 * kPi * f0 / fs, alpha = std::sin(w) / (2 * q), c = std::cos(w);
    return Biquad((1 - c) / 2, 1 - c, (1 - c) / 2, 1 + alpha, -2 * c, 1 - alpha);
  }
  double operator()(double x) {
    const double y = b0_ * x + b1_ * x1_ + b2_ * x2_ - a1_ * y1_ - a2_ * y2_;
    x2_ = x1_;
    x1_ = x;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  Biquad(double b0, double b1, double b2, double a0, double a1, double a2)
      : b0_(b0 / a0), b1_(b1 / a0), b2_(b2 / a0), a1_(a1 / a0), a2_(a2 / a0) {}
  double b0_, b1_, b2_, a1_, a2_;
  double x1_ = 0, x2_ = 0, y1_ = 0, y2_ = 0;
};

// One sound event of `n` samples.
std::vector<double> SynthEvent(std::mt19937_64& rng, std::size_t n, double fs) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  auto log_uniform = [&](double lo, double hi) { return lo * std::pow(hi / lo, u(rng)); };
  std::vector<double> y(n, 0.0);
  const int kind = static_cast<int>(u(rng) * 5);
  switch (kind) {
    case 0: {  // band-limited noise burst
      auto bp = Biquad::BandPass(log_uniform(200, 8000), 0.4 + 1.5 * u(rng), fs);
      for (auto& v : y) v = bp(g(rng));
      break;
    }
    case 1: {  // harmonic complex with vibrato
      const double f0 = log_uniform(90, 800), rolloff = 0.5 + u(rng), vib = 3 + 4 * u(rng);
      const double depth = 0.02 * u(rng);
      std::vector<double> phase(40, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double f = f0 * (1 + depth * std::sin(2 * kPi * vib * i / fs));
        double s = 0;
        for (int h = 1; h <= 40 && h * f < 0.45 * fs; ++h) {
          phase[h - 1] += 2 * kPi * h * f / fs;
          s += std::sin(phase[h - 1]) / std::pow(h, rolloff);
        }
        y[i] = s;
      }
      break;
    }
    case 2: {  // exponential sweep
      const double f1 = log_uniform(100, 1000), f2 = log_uniform(2000, 10000);
      const bool up = u(rng) < 0.5;
      double phase = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double r = static_cast<double>(i) / n;
        const double f = up ? f1 * std::pow(f2 / f1, r) : f2 * std::pow(f1 / f2, r);
        phase += 2 * kPi * f / fs;
        y[i] = std::sin(phase);
      }
      break;
    }
    case 3: {  // train of decaying resonant impacts
      const double rate = 3 + 12 * u(rng);
      const double f = log_uniform(150, 5000), decay = log_uniform(0.005, 0.08);
      auto lp = Biquad::LowPass(8000, 0.7, fs);
      double next = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (i >= next) {
          const double amp = 0.5 + u(rng);
          for (std::size_t j = i; j < n && j < i + static_cast<std::size_t>(6 * decay * fs); ++j) {
            const double t = (j - i) / fs;
            y[j] += amp * (std::exp(-t / decay) * std::sin(2 * kPi * f * t) +
                           0.3 * std::exp(-t / 0.002) * g(rng));
          }
          next = i + fs / rate * (0.5 + u(rng));
        }
        y[i] = lp(y[i]);
      }
      break;
    }
    default: {  // noise through two formants with syllabic modulation
      auto f1 = Biquad::BandPass(log_uniform(300, 900), 4, fs);
      auto f2 = Biquad::BandPass(log_uniform(1000, 3000), 5, fs);
      const double syl = 2 + 4 * u(rng);
      for (std::size_t i = 0; i < n; ++i) {
        const double e = g(rng);
        const double env = 0.5 * (1 - std::cos(2 * kPi * syl * i / fs));
        y[i] = env * (f1(e) + 0.6 * f2(e));
      }
    }
  }
  // Attack/release envelope.
  const double attack = 0.002 + 0.05 * u(rng), release = 0.02 + 0.3 * u(rng);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = i / fs, rest = (n - i) / fs;
    y[i] *= std::min({1.0, t / attack, rest / release});
  }
  return NormalizeLoudness(std::move(y), -20.0 + 6 * (u(rng) - 0.5));
}

std::vector<double> SynthClip(std::mt19937_64& rng, std::size_t n, double fs) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> clip(n);
  for (auto& v : clip) v = 1e-3 * g(rng);  // faint floor keeps every excerpt non-silent
  const int events = 1 + static_cast<int>(u(rng) * 3);
  for (int e = 0; e < events; ++e) {
    const std::size_t len = std::max<std::size_t>(n / 8, static_cast<std::size_t>(n * (0.3 + 0.7 * u(rng))));
    const std::size_t start = static_cast<std::size_t>(u(rng) * (n - len + 1));
    const auto ev = SynthEvent(rng, len, fs);
    for (std::size_t i = 0; i < len; ++i) clip[start + i] += ev[i];
  }
  return NormalizeLoudness(std::move(clip));
}

json Vec(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }
Eigen::Vector3d Vec(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

template <typename Fn>
void StrictObject(const json& j, const std::string& what, Fn&& assign) {
  Require(j.is_object(), ErrorCode::kConfigError, what + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = true;
    try {
      known = assign(key, value);
    } catch (const json::exception& e) {
      Fail(ErrorCode::kConfigError, what + "." + key + ": " + e.what());
    }
    Require(known, ErrorCode::kConfigError, "unknown key \"" + key + "\" in " + what);
  }
}

std::string ArrayHash(const MicArrayGeometry& g) {
  std::vector<float> v;
  for (const auto& p : g.positions)
    for (int i = 0; i < 3; ++i) v.push_back(static_cast<float>(p[i]));
  return HashFloats(v);
}

}  // namespace

std::vector<double> NormalizeLoudness(std::vector<double> x, double target_dbfs) {
  const double rms = Rms(x);
  if (rms <= 0.0) return x;
  const double gain = std::pow(10.0, target_dbfs / 20.0) / rms;
  for (auto& v : x) v *= gain;
  return x;
}

std::vector<AudioClip> LoadAudioDirectory(const std::string& dir, int sample_rate) {
  Require(fs::is_directory(dir), ErrorCode::kConfigError, "audio directory " + dir + " not found");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (entry.is_regular_file() && ext == ".wav") files.push_back(entry.path());
  }
  Require(!files.empty(), ErrorCode::kConfigError, "audio directory " + dir + " holds no .wav files");
  std::sort(files.begin(), files.end());
  std::vector<AudioClip> clips;
  for (const auto& f : files) {
    const auto audio = ReadWav(f.string());
    Require(audio.sample_rate == sample_rate, ErrorCode::kConfigError,
            f.string() + ": sample rate " + std::to_string(audio.sample_rate) + ", expected " +
                std::to_string(sample_rate));
    Require(audio.num_channels() == 1, ErrorCode::kFormatError,
            f.string() + ": expected mono, got " + std::to_string(audio.num_channels()) +
                " channels");
    clips.push_back({f.filename().string(), NormalizeLoudness(audio.channels[0])});
  }
  return clips;
}

void WriteSyntheticAudio(const std::string& dir, int count, double seconds, int sample_rate,
                         std::uint64_t seed) {
  Require(count >= 1 && seconds > 0, ErrorCode::kConfigError,
          "synthetic audio needs a positive clip count and duration");
  fs::create_directories(dir);
  const auto n = static_cast<std::size_t>(std::lround(seconds * sample_rate));
  for (int i = 0; i < count; ++i) {
    std::mt19937_64 rng(DeriveSeed(seed, "audio", i));
    AudioBuffer clip(1, 0, sample_rate);
    clip.channels[0] = SynthClip(rng, n, sample_rate);
    char name[32];
    std::snprintf(name, sizeof(name), "synth_%04d.wav", i);
    WriteWav((fs::path(dir) / name).string(), clip);
  }
}

AtfSet MakeAtfSet(const MicArrayGeometry& geometry, const DirectionGrid& grid, int bins,
                  int sample_rate, Directivity directivity) {
  auto atfs = FreefieldAtfSet(geometry, grid, bins, sample_rate);
  if (directivity == Directivity::kFreeField) return atfs;
  for (int p = 0; p < atfs.mics(); ++p) {
    const Eigen::Vector3d r = geometry.positions[p];
    const Eigen::Vector3d normal = r.norm() > 1e-9 ? Eigen::Vector3d(r.normalized())
                                                   : Eigen::Vector3d::UnitZ();
    for (int d = 0; d < atfs.directions(); ++d) {
      const float gain = static_cast<float>(0.4 + 0.3 * (1.0 + grid[d].ToUnit().dot(normal)));
      for (int f = 0; f < atfs.bins(); ++f) atfs.at(p, d, f) *= gain;
    }
  }
  return atfs;
}

std::size_t DatasetConfig::clip_samples() const {
  return static_cast<std::size_t>(std::lround(clip_seconds * sample_rate));
}

void DatasetConfig::Validate() const {
  auto check = [](bool ok, const std::string& what) {
    Require(ok, ErrorCode::kConfigError, "dataset config: " + what);
  };
  check(sample_rate > 0, "sample_rate must be positive");
  check(clip_seconds > 0 && clip_samples() >= 256, "clip_seconds too short");
  check(synthetic_clips >= 1 && synthetic_seconds >= clip_seconds,
        "synthetic clips must be at least clip_seconds long");
  check(directions >= 1, "directions must be positive");
  check(atf_bins >= 3 && ((atf_bins - 1) & (atf_bins - 2)) == 0, "atf_bins must be 2^k + 1");
  check(order >= 0 && order <= kMaxShOrder, "order must lie in [0, 3]");
  check(!splits.empty(), "at least one split is required");
  std::set<std::string> names;
  for (const auto& s : splits) {
    check(!s.name.empty() && s.name.find_first_of("/\\ ") == std::string::npos,
          "split names must be nonempty path-safe tokens");
    check(names.insert(s.name).second, "duplicate split " + s.name);
    check(s.scenes >= 1 && s.arrays >= 1, "split " + s.name + " needs scenes and arrays >= 1");
    check(s.max_sources >= 0, "split " + s.name + ": max_sources must be >= 0");
  }
}

json DatasetConfig::ToJson() const {
  json sp = json::array();
  for (const auto& s : splits)
    sp.push_back({{"name", s.name},
                  {"scenes", s.scenes},
                  {"arrays", s.arrays},
                  {"anechoic", s.anechoic},
                  {"max_sources", s.max_sources}});
  return {{"seed", seed},
          {"sample_rate", sample_rate},
          {"clip_seconds", clip_seconds},
          {"audio_dir", audio_dir},
          {"synthetic_clips", synthetic_clips},
          {"synthetic_seconds", synthetic_seconds},
          {"directions", directions},
          {"atf_bins", atf_bins},
          {"order", order},
          {"directivity", directivity == Directivity::kShadowed ? "shadowed" : "free_field"},
          {"splits", sp},
          {"scene",
           {{"room_min", scene.room_min},
            {"room_max", scene.room_max},
            {"rt60_min", scene.rt60_min},
            {"rt60_max", scene.rt60_max},
            {"min_sources", scene.min_sources},
            {"max_sources", scene.max_sources},
            {"source_wall_min", scene.source_wall_min},
            {"source_array_min", scene.source_array_min},
            {"array_wall_fraction", scene.array_wall_fraction}}},
          {"array",
           {{"num_mics", array.num_mics},
            {"cube_size", array.cube_size},
            {"lattice_steps", array.lattice_steps},
            {"min_distance", array.min_distance},
            {"max_distance", array.max_distance}}}};
}

DatasetConfig DatasetConfig::FromJson(const json& j) {
  DatasetConfig c;
  StrictObject(j, "dataset", [&](const std::string& k, const json& v) {
    if (k == "seed") c.seed = v.get<std::uint64_t>();
    else if (k == "sample_rate") c.sample_rate = v.get<int>();
    else if (k == "clip_seconds") c.clip_seconds = v.get<double>();
    else if (k == "audio_dir") c.audio_dir = v.get<std::string>();
    else if (k == "synthetic_clips") c.synthetic_clips = v.get<int>();
    else if (k == "synthetic_seconds") c.synthetic_seconds = v.get<double>();
    else if (k == "directions") c.directions = v.get<int>();
    else if (k == "atf_bins") c.atf_bins = v.get<int>();
    else if (k == "order") c.order = v.get<int>();
    else if (k == "directivity") {
      const auto s = v.get<std::string>();
      Require(s == "free_field" || s == "shadowed", ErrorCode::kConfigError,
              "directivity must be \"free_field\" or \"shadowed\"");
      c.directivity = s == "shadowed" ? Directivity::kShadowed : Directivity::kFreeField;
    } else if (k == "splits") {
      Require(v.is_array(), ErrorCode::kConfigError, "splits must be an array");
      c.splits.clear();
      for (const auto& s : v) {
        SplitSpec spec;
        StrictObject(s, "splits[]", [&](const std::string& sk, const json& sv) {
          if (sk == "name") spec.name = sv.get<std::string>();
          else if (sk == "scenes") spec.scenes = sv.get<int>();
          else if (sk == "arrays") spec.arrays = sv.get<int>();
          else if (sk == "anechoic") spec.anechoic = sv.get<bool>();
          else if (sk == "max_sources") spec.max_sources = sv.get<int>();
          else return false;
          return true;
        });
        c.splits.push_back(spec);
      }
    } else if (k == "scene") {
      StrictObject(v, "scene", [&](const std::string& sk, const json& sv) {
        auto& s = c.scene;
        if (sk == "room_min") s.room_min = sv.get<double>();
        else if (sk == "room_max") s.room_max = sv.get<double>();
        else if (sk == "rt60_min") s.rt60_min = sv.get<double>();
        else if (sk == "rt60_max") s.rt60_max = sv.get<double>();
        else if (sk == "min_sources") s.min_sources = sv.get<int>();
        else if (sk == "max_sources") s.max_sources = sv.get<int>();
        else if (sk == "source_wall_min") s.source_wall_min = sv.get<double>();
        else if (sk == "source_array_min") s.source_array_min = sv.get<double>();
        else if (sk == "array_wall_fraction") s.array_wall_fraction = sv.get<double>();
        else return false;
        return true;
      });
    } else if (k == "array") {
      StrictObject(v, "array", [&](const std::string& sk, const json& sv) {
        auto& a = c.array;
        if (sk == "num_mics") a.num_mics = sv.get<int>();
        else if (sk == "cube_size") a.cube_size = sv.get<double>();
        else if (sk == "lattice_steps") a.lattice_steps = sv.get<int>();
        else if (sk == "min_distance") a.min_distance = sv.get<double>();
        else if (sk == "max_distance") a.max_distance = sv.get<double>();
        else return false;
        return true;
      });
    } else {
      return false;
    }
    return true;
  });
  c.Validate();
  return c;
}

json ExampleRecord::ToJson() const {
  json src = json::array();
  for (const auto& s : sources)
    src.push_back({{"position", Vec(s.position)}, {"doa", Vec(s.doa)}, {"clip", s.clip},
                   {"offset", s.offset}});
  return {{"id", id},           {"split", split},       {"scene", scene},
          {"scene_seed", scene_seed}, {"array_id", array_id}, {"atf", atf},
          {"mic", mic},         {"ref", ref},           {"anechoic", anechoic},
          {"rt60", rt60},       {"room", Vec(room)},    {"array_position", Vec(array_position)},
          {"sources", src}};
}

ExampleRecord ExampleRecord::FromJson(const json& j) {
  try {
    ExampleRecord r;
    r.id = j.at("id").get<std::string>();
    r.split = j.at("split").get<std::string>();
    r.scene = j.at("scene").get<int>();
    r.scene_seed = j.at("scene_seed").get<std::uint64_t>();
    r.array_id = j.at("array_id").get<std::string>();
    r.atf = j.at("atf").get<std::string>();
    r.mic = j.at("mic").get<std::string>();
    r.ref = j.at("ref").get<std::string>();
    r.anechoic = j.at("anechoic").get<bool>();
    r.rt60 = j.at("rt60").get<double>();
    r.room = Vec(j.at("room"));
    r.array_position = Vec(j.at("array_position"));
    for (const auto& s : j.at("sources"))
      r.sources.push_back({Vec(s.at("position")), Vec(s.at("doa")), s.at("clip").get<std::string>(),
                           s.at("offset").get<std::size_t>()});
    return r;
  } catch (const json::exception& e) {
    Fail(ErrorCode::kFormatError, std::string("manifest record: ") + e.what());
  }
}

void WriteManifest(const std::string& path, const std::vector<ExampleRecord>& examples) {
  std::ofstream out(path);
  Require(static_cast<bool>(out), ErrorCode::kIoError, "cannot write " + path);
  for (const auto& e : examples) out << e.ToJson().dump() << '\n';
  Require(static_cast<bool>(out), ErrorCode::kIoError, "failed writing " + path);
}

std::vector<ExampleRecord> ReadManifest(const std::string& path) {
  std::ifstream in(path);
  Require(static_cast<bool>(in), ErrorCode::kIoError, "cannot open manifest " + path);
  std::vector<ExampleRecord> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      Fail(ErrorCode::kFormatError, path + ":" + std::to_string(number) + ": " + e.what());
    }
    out.push_back(ExampleRecord::FromJson(j));
  }
  return out;
}

std::vector<ExampleRecord> ReadSplit(const std::string& root, const std::string& split) {
  return ReadManifest((fs::path(root) / "manifests" / (split + ".jsonl")).string());
}

std::string AuditSplits(const std::vector<ExampleRecord>& examples) {
  std::map<std::uint64_t, std::string> scene_owner;
  std::map<std::string, std::string> array_owner;
  for (const auto& e : examples) {
    auto [s, new_scene] = scene_owner.emplace(e.scene_seed, e.split);
    if (!new_scene && s->second != e.split)
      return "scene seed " + std::to_string(e.scene_seed) + " appears in " + s->second +
             " and " + e.split;
    auto [a, new_array] = array_owner.emplace(e.array_id, e.split);
    if (!new_array && a->second != e.split)
      return "array " + e.array_id + " appears in " + a->second + " and " + e.split;
  }
  return "";
}

std::vector<ExampleRecord> BuildDataset(const DatasetConfig& config, const std::string& root,
                                        int jobs) {
  config.Validate();
  const fs::path base(root);
  Require(base.parent_path().empty() || fs::is_directory(base.parent_path()),
          ErrorCode::kIoError, "parent directory of " + root + " does not exist");
  for (const char* sub : {"atf", "mic", "ref", "manifests"}) fs::create_directories(base / sub);

  std::vector<AudioClip> clips;
  std::string audio_dir = config.audio_dir;
  if (audio_dir.empty()) {
    audio_dir = (base / "audio").string();
    WriteSyntheticAudio(audio_dir, config.synthetic_clips, config.synthetic_seconds,
                        config.sample_rate, DeriveSeed(config.seed, "corpus", 0));
  }
  clips = LoadAudioDirectory(audio_dir, config.sample_rate);

  const auto grid = FibonacciGrid(config.directions);
  const std::size_t length = config.clip_samples();
  const int ir_length = 2 * (config.atf_bins - 1);

  // Draw scenes and arrays sequentially so that uniqueness checks are
  // deterministic, then render in parallel.
  struct Job {
    SplitSpec split;
    int index;
    Scene scene;
    std::vector<MicArrayGeometry> arrays;
    std::vector<std::string> array_ids;
  };
  std::vector<Job> work;
  std::set<std::string> seen_arrays;
  std::set<std::uint64_t> seen_scenes;
  for (const auto& split : config.splits) {
    for (int i = 0; i < split.scenes; ++i) {
      Job job{split, i, {}, {}, {}};
      std::uint64_t scene_seed = DeriveSeed(config.seed, "scene:" + split.name, i);
      while (!seen_scenes.insert(scene_seed).second) scene_seed = SplitMix(scene_seed);
      job.scene = SampleScene(scene_seed, config.scene);
      if (split.max_sources > 0 && static_cast<int>(job.scene.sources.size()) > split.max_sources)
        job.scene.sources.resize(split.max_sources);
      std::mt19937_64 rng(DeriveSeed(config.seed, "array:" + split.name, i));
      while (static_cast<int>(job.arrays.size()) < split.arrays) {
        auto g = SampleArray(rng, config.array);
        auto id = ArrayHash(g);
        if (!seen_arrays.insert(id).second) continue;
        job.arrays.push_back(std::move(g));
        job.array_ids.push_back(std::move(id));
      }
      std::mt19937_64 clip_rng(DeriveSeed(config.seed, "clips:" + split.name, i));
      for (auto& s : job.scene.sources) {
        const auto& clip = clips[clip_rng() % clips.size()];
        s.clip = clip.name;
        const std::size_t span = clip.samples.size() > length ? clip.samples.size() - length : 0;
        s.offset = span ? clip_rng() % (span + 1) : 0;
      }
      work.push_back(std::move(job));
    }
  }

  std::map<std::string, const AudioClip*> by_name;
  for (const auto& c : clips) by_name[c.name] = &c;
  std::vector<std::vector<ExampleRecord>> results(work.size());
  ParallelFor(static_cast<int>(work.size()), jobs, [&](int w) {
    const auto& job = work[w];
    std::vector<std::vector<double>> signals;
    for (const auto& s : job.scene.sources) {
      const auto& samples = by_name.at(s.clip)->samples;
      std::vector<double> x(length, 0.0);
      for (std::size_t i = 0; i < length && s.offset + i < samples.size(); ++i)
        x[i] = samples[s.offset + i];
      signals.push_back(std::move(x));
    }
    RenderOptions options;
    options.order = config.order;
    options.output_length = length;
    if (job.split.anechoic) options.images.absorption = 1.0;
    SceneField field(job.scene, signals, config.sample_rate, grid, ir_length, options);

    char stem[96];
    std::snprintf(stem, sizeof(stem), "%s_s%03d", job.split.name.c_str(), job.index);
    const std::string ref = std::string("ref/") + stem + ".wav";
    WriteWav((base / ref).string(), field.reference(), "ambisonics ACN/N3D");
    for (std::size_t a = 0; a < job.arrays.size(); ++a) {
      ExampleRecord r;
      char id[128];
      std::snprintf(id, sizeof(id), "%s_a%03zu", stem, a);
      r.id = id;
      r.split = job.split.name;
      r.scene = job.index;
      r.scene_seed = job.scene.seed;
      r.array_id = job.array_ids[a];
      r.atf = "atf/" + r.array_id + ".atf";
      r.mic = "mic/" + r.id + ".wav";
      r.ref = ref;
      r.anechoic = job.split.anechoic;
      r.rt60 = job.split.anechoic ? 0.0 : job.scene.rt60;
      r.room = job.scene.room;
      r.array_position = job.scene.array_position;
      for (const auto& s : job.scene.sources)
        r.sources.push_back({s.position, (s.position - job.scene.array_position).normalized(),
                             s.clip, s.offset});
      const auto atfs = MakeAtfSet(job.arrays[a], grid, config.atf_bins, config.sample_rate,
                                   config.directivity);
      SaveAtfSet(atfs, (base / r.atf).string());
      WriteWav((base / r.mic).string(), field.RenderMics(atfs));
      results[w].push_back(std::move(r));
    }
  });

  std::vector<ExampleRecord> all;
  for (const auto& split : config.splits) {
    std::vector<ExampleRecord> records;
    for (std::size_t w = 0; w < work.size(); ++w)
      if (work[w].split.name == split.name)
        records.insert(records.end(), results[w].begin(), results[w].end());
    WriteManifest((base / "manifests" / (split.name + ".jsonl")).string(), records);
    all.insert(all.end(), records.begin(), records.end());
  }
  const auto overlap = AuditSplits(all);
  Require(overlap.empty(), ErrorCode::kInternalError, "split audit failed: " + overlap);

  json info = {{"config", config.ToJson()}, {"audio_dir", audio_dir}, {"clips", json::array()}};
  for (const auto& c : clips) info["clips"].push_back(c.name);
  std::ofstream out(base / "dataset.json");
  out << info.dump(2) << '\n';
  Require(static_cast<bool>(out), ErrorCode::kIoError, "failed writing dataset.json");
  return all;
}

LoadedExample LoadExample(const std::string& root, const ExampleRecord& record) {
  const fs::path base(root);
  LoadedExample ex{ReadWav((base / record.mic).string()), ReadWav((base / record.ref).string()),
                   LoadAtfSet((base / record.atf).string())};
  Require(ex.mic.num_samples() == ex.reference.num_samples(), ErrorCode::kFormatError,
          record.id + ": mic and reference lengths differ");
  Require(ex.mic.num_channels() == static_cast<std::size_t>(ex.atfs.mics()), ErrorCode::kFormatError,
          record.id + ": mic channels do not match the ATF set");
  return ex;
}

}  // namespace ambix
