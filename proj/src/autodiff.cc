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

#include "ambix/autodiff.h"

#include <unordered_set>
#include <utility>

#include "ambix/error.h"

namespace ambix::nn {

std::int64_t NumElements(const Shape& shape) {
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string ShapeString(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

namespace {

template <typename T>
std::shared_ptr<Node<T>> NewNode(Shape shape, std::vector<T> values) {
  for (auto d : shape) Require(d >= 0, ErrorCode::kShapeError, "negative dimension");
  Require(NumElements(shape) == static_cast<std::int64_t>(values.size()),
          ErrorCode::kShapeError,
          "value count " + std::to_string(values.size()) + " does not fit shape " +
              ShapeString(shape));
  auto node = std::make_shared<Node<T>>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  return node;
}

}  // namespace

template <typename T>
Tensor<T> Tensor<T>::Constant(Shape shape, std::vector<T> values) {
  return Tensor(NewNode(std::move(shape), std::move(values)));
}

template <typename T>
Tensor<T> Tensor<T>::Zeros(Shape shape) {
  const auto n = NumElements(shape);
  return Constant(std::move(shape), std::vector<T>(n, T(0)));
}

template <typename T>
Tensor<T> Tensor<T>::Parameter(Shape shape, std::vector<T> values) {
  auto node = NewNode(std::move(shape), std::move(values));
  node->requires_grad = true;
  return Tensor(std::move(node));
}

template <typename T>
std::int64_t Tensor<T>::dim(int axis) const {
  const int r = rank();
  if (axis < 0) axis += r;
  Require(axis >= 0 && axis < r, ErrorCode::kShapeError, "axis out of range");
  return node_->shape[axis];
}

template <typename T>
T Tensor<T>::item() const {
  Require(size() == 1, ErrorCode::kShapeError, "item() needs a single element");
  return node_->value[0];
}

template <typename T>
Tensor<T> Tensor<T>::Detach() const {
  return Constant(node_->shape, node_->value);
}

template <typename T>
Tensor<T> MakeResult(Shape shape, std::vector<T> value,
                     std::vector<std::shared_ptr<Node<T>>> parents,
                     std::function<void(Node<T>&)> backward) {
  auto node = NewNode(std::move(shape), std::move(value));
  for (const auto& p : parents) node->requires_grad = node->requires_grad || p->requires_grad;
  if (node->requires_grad) {
    node->parents = std::move(parents);
    node->backward = std::move(backward);
  }
  return Tensor<T>(std::move(node));
}

template <typename T>
std::vector<Node<T>*> TopologicalOrder(const Tensor<T>& root) {
  std::vector<Node<T>*> order;
  if (!root.requires_grad()) return order;
  std::unordered_set<Node<T>*> seen;
  // Iterative post-order DFS.
  std::vector<std::pair<Node<T>*, std::size_t>> stack{{root.node(), 0}};
  seen.insert(root.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node<T>* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) stack.push_back({parent, 0});
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  return {order.rbegin(), order.rend()};
}

template <typename T>
void Backward(const Tensor<T>& loss) {
  Require(loss.defined() && loss.size() == 1, ErrorCode::kInvalidArgument,
          "backward needs a scalar loss");
  if (!loss.requires_grad()) return;
  const auto order = TopologicalOrder(loss);
  loss.node()->GradBuffer()[0] += T(1);
  for (Node<T>* node : order) {
    if (node->backward && !node->grad.empty()) {
      node->backward(*node);
      // Interior gradients are not needed once propagated.
      node->grad.clear();
      node->grad.shrink_to_fit();
    }
  }
}

#define AMBIX_INSTANTIATE(T)                                                            \
  template class Tensor<T>;                                                             \
  template Tensor<T> MakeResult<T>(Shape, std::vector<T>,                               \
                                   std::vector<std::shared_ptr<Node<T>>>,               \
                                   std::function<void(Node<T>&)>);                      \
  template std::vector<Node<T>*> TopologicalOrder<T>(const Tensor<T>&);                 \
  template void Backward<T>(const Tensor<T>&);

AMBIX_INSTANTIATE(float)
AMBIX_INSTANTIATE(double)
#undef AMBIX_INSTANTIATE

}  // namespace ambix::nn
