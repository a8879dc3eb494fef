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

#ifndef AMBIX_DATASET_H_
#define AMBIX_DATASET_H_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ambix/atf.h"
#include "ambix/dsp.h"
#include "ambix/room.h"
#include "nlohmann/json.hpp"

namespace ambix {

inline constexpr double kTargetLoudnessDbfs = -23.0;

// Scales x to the given RMS level in dBFS. Silent input is returned as is.
std::vector<double> NormalizeLoudness(std::vector<double> x,
                                      double target_dbfs = kTargetLoudnessDbfs);

struct AudioClip {
  std::string name;
  std::vector<double> samples;  // loudness normalised
};

// Loads every *.wav in `dir` (sorted by name). Files must be mono at
// `sample_rate`. kConfigError when the directory holds no audio or a rate
// differs; kFormatError for multichannel files.
std::vector<AudioClip> LoadAudioDirectory(const std::string& dir, int sample_rate);

// Writes `count` mono clips of broadband synthetic sounds (filtered noise
// bursts, harmonic tones, sweeps, impacts, formant-modulated noise) to `dir`
// as a stand-in for an environmental sound corpus. Deterministic per seed.
void WriteSyntheticAudio(const std::string& dir, int count, double seconds, int sample_rate,
                         std::uint64_t seed);

enum class Directivity {
  kFreeField,
  // Free field times a per-microphone gain 0.4 + 0.3 (1 + u.n_p), where n_p
  // points from the array centre to microphone p: a crude body-shadow model.
  kShadowed,
};

AtfSet MakeAtfSet(const MicArrayGeometry& geometry, const DirectionGrid& grid, int bins,
                  int sample_rate, Directivity directivity);

struct SplitSpec {
  std::string name;
  int scenes = 0;
  int arrays = 0;          // arrays per scene, never shared across scenes
  bool anechoic = false;   // direct path only
  int max_sources = 0;     // > 0 caps the source count
};

struct DatasetConfig {
  std::uint64_t seed = 1;
  int sample_rate = 24000;
  double clip_seconds = 0.25;
  std::string audio_dir;   // empty: generate a synthetic corpus
  int synthetic_clips = 64;
  double synthetic_seconds = 2.0;
  int directions = 240;
  int atf_bins = 65;
  int order = 1;
  Directivity directivity = Directivity::kFreeField;
  std::vector<SplitSpec> splits = {{"train", 40, 20, false, 0},
                                   {"val", 10, 10, false, 0},
                                   {"test", 10, 50, false, 0},
                                   {"doa", 10, 5, true, 1}};
  SceneConfig scene;
  ArrayConstraints array;

  std::size_t clip_samples() const;
  void Validate() const;
  nlohmann::json ToJson() const;
  // Strict: unknown keys raise kConfigError. Missing keys keep defaults.
  static DatasetConfig FromJson(const nlohmann::json& j);
};

struct SourceRecord {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d doa = Eigen::Vector3d::UnitX();  // direct path, from the array
  std::string clip;
  std::size_t offset = 0;
};

struct ExampleRecord {
  std::string id;
  std::string split;
  int scene = 0;                 // index within the split
  std::uint64_t scene_seed = 0;
  std::string array_id;          // geometry hash
  std::string atf;               // paths relative to the dataset root
  std::string mic;
  std::string ref;
  bool anechoic = false;
  double rt60 = 0.0;
  Eigen::Vector3d room = Eigen::Vector3d::Zero();
  Eigen::Vector3d array_position = Eigen::Vector3d::Zero();
  std::vector<SourceRecord> sources;

  nlohmann::json ToJson() const;
  static ExampleRecord FromJson(const nlohmann::json& j);
};

// One JSON object per line.
void WriteManifest(const std::string& path, const std::vector<ExampleRecord>& examples);
std::vector<ExampleRecord> ReadManifest(const std::string& path);
// <root>/manifests/<split>.jsonl
std::vector<ExampleRecord> ReadSplit(const std::string& root, const std::string& split);

// Empty when no scene seed or array appears in more than one split;
// otherwise a description of the first overlap.
std::string AuditSplits(const std::vector<ExampleRecord>& examples);

// Renders every split into `root` (which must not exist or be a directory
// whose parent exists): atf/, mic/, ref/, manifests/ and dataset.json.
// Returns all examples. Deterministic per config.seed.
std::vector<ExampleRecord> BuildDataset(const DatasetConfig& config, const std::string& root,
                                        int jobs = 1);

struct LoadedExample {
  AudioBuffer mic;
  AudioBuffer reference;
  AtfSet atfs;
};
LoadedExample LoadExample(const std::string& root, const ExampleRecord& record);

}  // namespace ambix

#endif  // AMBIX_DATASET_H_
