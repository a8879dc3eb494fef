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

#ifndef AMBIX_OPTIM_H_
#define AMBIX_OPTIM_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ambix/autodiff.h"
#include "nlohmann/json.hpp"

namespace ambix::nn {

// Named parameters in registration order, with Adam moments.
template <typename T>
class ParamStore {
 public:
  // kInvalidArgument on a duplicate name.
  Tensor<T> Add(const std::string& name, Shape shape, std::vector<T> values);

  const Tensor<T>& Get(const std::string& name) const;
  Tensor<T>& Get(const std::string& name);
  bool Contains(const std::string& name) const { return index_.contains(name); }
  const std::vector<std::string>& names() const { return names_; }
  std::int64_t NumParameters() const;

  void ZeroGrad();
  // Multiplies every populated gradient by s.
  void ScaleGrad(T s);
  // True when every parameter value and gradient is finite.
  bool AllFinite() const;

  std::int64_t step() const { return step_; }
  void set_step(std::int64_t s) { step_ = s; }
  std::vector<T>& moment1(const std::string& name) { return m_[index_.at(name)]; }
  std::vector<T>& moment2(const std::string& name) { return v_[index_.at(name)]; }
  const std::vector<T>& moment1(const std::string& name) const { return m_[index_.at(name)]; }
  const std::vector<T>& moment2(const std::string& name) const { return v_[index_.at(name)]; }

  // Copies values (and optimiser state) from a store of another precision
  // with identical names and shapes.
  template <typename U>
  void CopyFrom(const ParamStore<U>& other);

 private:
  std::vector<std::string> names_;
  std::map<std::string, std::size_t> index_;
  std::vector<Tensor<T>> params_;
  std::vector<std::vector<T>> m_, v_;
  std::int64_t step_ = 0;
};

struct AdamOptions {
  double lr = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One bias-corrected Adam step. kStateError when a parameter has no gradient.
template <typename T>
void AdamStep(ParamStore<T>& store, const AdamOptions& options = {});

// "CKPT" container: header {version, step, names, shapes, extra}, payload
// = parameters, then first moments, then second moments, each in name order.
void SaveCheckpoint(const ParamStore<float>& store, const std::string& path,
                    const nlohmann::json& extra = {});
// Loads into a store that already holds parameters of the same names and
// shapes; returns the header's "extra" object. kFormatError on mismatch.
nlohmann::json LoadCheckpoint(ParamStore<float>& store, const std::string& path);
nlohmann::json ReadCheckpointHeader(const std::string& path);

}  // namespace ambix::nn

#endif  // AMBIX_OPTIM_H_
