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

#include "ambix/optim.h"

#include <cmath>

#include "ambix/container.h"
#include "ambix/error.h"

namespace ambix::nn {
namespace {

constexpr int kCheckpointVersion = 1;

}  // namespace

template <typename T>
Tensor<T> ParamStore<T>::Add(const std::string& name, Shape shape, std::vector<T> values) {
  Require(!index_.contains(name), ErrorCode::kInvalidArgument, "duplicate parameter " + name);
  auto t = Tensor<T>::Parameter(std::move(shape), std::move(values));
  index_[name] = params_.size();
  names_.push_back(name);
  m_.emplace_back(t.value().size(), T(0));
  v_.emplace_back(t.value().size(), T(0));
  params_.push_back(t);
  return t;
}

template <typename T>
const Tensor<T>& ParamStore<T>::Get(const std::string& name) const {
  const auto it = index_.find(name);
  Require(it != index_.end(), ErrorCode::kInvalidArgument, "unknown parameter " + name);
  return params_[it->second];
}

template <typename T>
Tensor<T>& ParamStore<T>::Get(const std::string& name) {
  const auto it = index_.find(name);
  Require(it != index_.end(), ErrorCode::kInvalidArgument, "unknown parameter " + name);
  return params_[it->second];
}

template <typename T>
std::int64_t ParamStore<T>::NumParameters() const {
  std::int64_t n = 0;
  for (const auto& p : params_) n += p.size();
  return n;
}

template <typename T>
void ParamStore<T>::ZeroGrad() {
  for (auto& p : params_) p.ZeroGrad();
}

template <typename T>
void ParamStore<T>::ScaleGrad(T s) {
  for (auto& p : params_) {
    for (auto& g : p.grad()) g *= s;
  }
}

template <typename T>
bool ParamStore<T>::AllFinite() const {
  for (const auto& p : params_) {
    for (T v : p.value()) {
      if (!std::isfinite(v)) return false;
    }
    for (T v : p.grad()) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

template <typename T>
template <typename U>
void ParamStore<T>::CopyFrom(const ParamStore<U>& other) {
  Require(other.names() == names_, ErrorCode::kInvalidArgument, "parameter names differ");
  for (std::size_t i = 0; i < names_.size(); ++i) {
    const auto& src = other.Get(names_[i]);
    Require(src.shape() == params_[i].shape(), ErrorCode::kShapeError,
            "shape mismatch for " + names_[i]);
    for (std::size_t k = 0; k < src.value().size(); ++k) {
      params_[i].value()[k] = static_cast<T>(src.value()[k]);
      m_[i][k] = static_cast<T>(other.moment1(names_[i])[k]);
      v_[i][k] = static_cast<T>(other.moment2(names_[i])[k]);
    }
  }
  step_ = other.step();
}

template <typename T>
void AdamStep(ParamStore<T>& store, const AdamOptions& options) {
  for (const auto& name : store.names()) {
    Require(store.Get(name).has_grad(), ErrorCode::kStateError,
            "parameter " + name + " has no gradient; run backward first");
  }
  store.set_step(store.step() + 1);
  const double t = static_cast<double>(store.step());
  const double c1 = 1.0 - std::pow(options.beta1, t);
  const double c2 = 1.0 - std::pow(options.beta2, t);
  for (const auto& name : store.names()) {
    auto& p = store.Get(name);
    auto& m = store.moment1(name);
    auto& v = store.moment2(name);
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double g = p.grad()[i];
      m[i] = static_cast<T>(options.beta1 * m[i] + (1 - options.beta1) * g);
      v[i] = static_cast<T>(options.beta2 * v[i] + (1 - options.beta2) * g * g);
      const double mh = m[i] / c1;
      const double vh = v[i] / c2;
      p.value()[i] -= static_cast<T>(options.lr * mh / (std::sqrt(vh) + options.eps));
    }
  }
}

void SaveCheckpoint(const ParamStore<float>& store, const std::string& path,
                    const nlohmann::json& extra) {
  nlohmann::json names = nlohmann::json::array();
  nlohmann::json shapes = nlohmann::json::array();
  std::vector<float> payload;
  payload.reserve(3 * store.NumParameters());
  for (const auto& name : store.names()) {
    names.push_back(name);
    shapes.push_back(store.Get(name).shape());
    const auto& v = store.Get(name).value();
    payload.insert(payload.end(), v.begin(), v.end());
  }
  for (const auto& name : store.names()) {
    const auto& m = store.moment1(name);
    payload.insert(payload.end(), m.begin(), m.end());
  }
  for (const auto& name : store.names()) {
    const auto& v = store.moment2(name);
    payload.insert(payload.end(), v.begin(), v.end());
  }
  const nlohmann::json header = {{"version", kCheckpointVersion},
                                 {"step", store.step()},
                                 {"names", names},
                                 {"shapes", shapes},
                                 {"sections", {"params", "adam_m", "adam_v"}},
                                 {"extra", extra.is_null() ? nlohmann::json::object() : extra}};
  WriteContainer(path, "CKPT", header, payload);
}

nlohmann::json ReadCheckpointHeader(const std::string& path) {
  return ReadContainer(path, "CKPT").header;
}

nlohmann::json LoadCheckpoint(ParamStore<float>& store, const std::string& path) {
  const Container c = ReadContainer(path, "CKPT");
  std::vector<std::string> names;
  std::vector<Shape> shapes;
  std::int64_t step = 0;
  try {
    Require(c.header.at("version").get<int>() == kCheckpointVersion, ErrorCode::kFormatError,
            path + ": unsupported checkpoint version");
    names = c.header.at("names").get<std::vector<std::string>>();
    shapes = c.header.at("shapes").get<std::vector<Shape>>();
    step = c.header.at("step").get<std::int64_t>();
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kFormatError, path + ": bad checkpoint header: " + e.what());
  }
  Require(names == store.names(), ErrorCode::kFormatError,
          path + ": parameter names do not match the model");
  std::size_t total = 0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    Require(shapes[i] == store.Get(names[i]).shape(), ErrorCode::kFormatError,
            path + ": shape mismatch for " + names[i] + ": " + ShapeString(shapes[i]) +
                " vs " + ShapeString(store.Get(names[i]).shape()));
    total += static_cast<std::size_t>(NumElements(shapes[i]));
  }
  Require(c.payload.size() == 3 * total, ErrorCode::kFormatError,
          path + ": payload size does not match header");
  std::size_t offset = 0;
  for (const auto& name : names) {
    auto& v = store.Get(name).value();
    std::copy_n(c.payload.begin() + offset, v.size(), v.begin());
    offset += v.size();
  }
  for (const auto& name : names) {
    auto& m = store.moment1(name);
    std::copy_n(c.payload.begin() + offset, m.size(), m.begin());
    offset += m.size();
  }
  for (const auto& name : names) {
    auto& v = store.moment2(name);
    std::copy_n(c.payload.begin() + offset, v.size(), v.begin());
    offset += v.size();
  }
  store.set_step(step);
  store.ZeroGrad();
  return c.header.value("extra", nlohmann::json::object());
}

template class ParamStore<float>;
template class ParamStore<double>;
template void ParamStore<float>::CopyFrom(const ParamStore<double>&);
template void ParamStore<double>::CopyFrom(const ParamStore<float>&);
template void ParamStore<float>::CopyFrom(const ParamStore<float>&);
template void ParamStore<double>::CopyFrom(const ParamStore<double>&);
template void AdamStep(ParamStore<float>&, const AdamOptions&);
template void AdamStep(ParamStore<double>&, const AdamOptions&);

}  // namespace ambix::nn
