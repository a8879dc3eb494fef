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

#ifndef AMBIX_TRAINING_H_
#define AMBIX_TRAINING_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ambix/dataset.h"
#include "ambix/model.h"
#include "nlohmann/json.hpp"

namespace ambix {

struct TrainConfig {
  int batch_size = 16;
  double lr = 2e-4;
  int max_epochs = 100;
  int patience = 10;
  std::int64_t max_steps = 0;  // > 0 stops (resumably) after this many total steps
  std::uint64_t seed = 1;
  std::string train_split = "train";
  std::string val_split = "val";
  int max_train_examples = 0;  // > 0 uses a fixed prefix of the training split
  bool freeze = false;         // skip optimiser updates (diagnostics)
  nn::ModelConfig model = nn::ModelConfig::Desk();

  void Validate() const;
  nlohmann::json ToJson() const;
  static TrainConfig FromJson(const nlohmann::json& j);
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;  // mean over the epoch's batches; NaN for epoch 0
  double val_loss = 0.0;
  double seconds = 0.0;
};

struct TrainResult {
  std::vector<EpochLog> log;
  std::vector<double> step_losses;  // batch losses of this invocation
  double best_val = 0.0;
  int best_epoch = 0;
  std::int64_t steps = 0;           // total optimiser steps so far
  bool early_stopped = false;
  bool finished = false;            // false when max_steps interrupted an epoch
};

struct TrainOptions {
  bool resume = false;
  std::function<void(const std::string&)> progress;  // one line per event
};

// Trains on <data>/manifests/<train_split>.jsonl, validating on val_split.
// Writes <checkpoint> (best validation), <checkpoint>.last (resume state)
// and <checkpoint>.log.csv. A non-finite loss or gradient raises
// kNumericalError after writing <checkpoint>.nan.json with the step, epoch
// and example ids of the failing batch.
TrainResult Train(const TrainConfig& config, const std::string& data_dir,
                  const std::string& checkpoint, const TrainOptions& options = {});

// A model restored from a checkpoint written by Train.
nn::Model<float> LoadModel(const std::string& checkpoint);

// Model inputs for one example.
struct ModelInputs {
  nn::Tensor<float> x;  // [2P, F, T]
  nn::Tensor<float> h;  // [2P, D, F_H]
  std::size_t length = 0;
};
ModelInputs PrepareInputs(const nn::ModelConfig& config, const AudioBuffer& mic,
                          const AtfSet& atfs);

// Encodes a microphone recording with a trained model.
AudioBuffer EncodeWithModel(const nn::Model<float>& model, const AudioBuffer& mic,
                            const AtfSet& atfs, nn::Tensor<float>* attention = nullptr);

enum class Method { kProposed, kStatic, kParametric };
std::string MethodName(Method m);

struct ExampleMetrics {
  std::string id;
  std::string method;
  double si_sdr = 0.0;
  double coherence = 0.0;
  double ms_err = 0.0;
  std::vector<double> ms_err_by_bin;
  // Proposed model on single-source examples: angle in degrees between the
  // direction with the largest mean attention and the true DOA.
  double attention_error_deg = -1.0;
};

struct EvalOptions {
  std::string checkpoint;  // required for kProposed
  int jobs = 1;
  std::string attention_dir;  // when set, per-example attention CSVs for single-source examples
};

std::vector<ExampleMetrics> Evaluate(Method method, const std::string& data_dir,
                                     const std::vector<ExampleRecord>& examples,
                                     const EvalOptions& options = {});

// metrics.csv (example_id, method, si_sdr, coh, ms_err), table.csv
// (method, si_sdr, coh, ms_err), summary.json, summary.txt and
// mag_err.csv (method, freq_hz, ms_err_db).
void WriteReport(const std::string& dir, const std::vector<ExampleMetrics>& metrics,
                 int sample_rate, const StftParams& params);

}  // namespace ambix

#endif  // AMBIX_TRAINING_H_
