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

#ifndef AMBIX_AUTODIFF_H_
#define AMBIX_AUTODIFF_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace ambix::nn {

using Shape = std::vector<std::int64_t>;

std::int64_t NumElements(const Shape& shape);
std::string ShapeString(const Shape& shape);

template <typename T>
struct Node {
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;  // empty until something flows into it
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this->grad and accumulates into the parents' grads.
  std::function<void(Node&)> backward;

  std::vector<T>& GradBuffer() {
    if (grad.empty()) grad.assign(value.size(), T(0));
    return grad;
  }
};

// Handle to a node of the computation graph. Copies share the node.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  static Tensor Constant(Shape shape, std::vector<T> values);
  static Tensor Zeros(Shape shape);
  // A leaf that accumulates gradients across backward passes.
  static Tensor Parameter(Shape shape, std::vector<T> values);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::int64_t dim(int axis) const;
  int rank() const { return static_cast<int>(node_->shape.size()); }
  std::int64_t size() const { return static_cast<std::int64_t>(node_->value.size()); }
  std::vector<T>& value() { return node_->value; }
  const std::vector<T>& value() const { return node_->value; }
  const std::vector<T>& grad() const { return node_->grad; }
  std::vector<T>& grad() { return node_->grad; }
  bool has_grad() const { return !node_->grad.empty(); }
  bool requires_grad() const { return node_->requires_grad; }
  T item() const;

  // Same values, cut from the graph.
  Tensor Detach() const;
  void ZeroGrad() { node_->grad.clear(); }

  Node<T>* node() const { return node_.get(); }
  const std::shared_ptr<Node<T>>& shared() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

// Creates the output node of an op. requires_grad is inherited from the
// inputs; `backward` is only kept when it is needed.
template <typename T>
Tensor<T> MakeResult(Shape shape, std::vector<T> value,
                     std::vector<std::shared_ptr<Node<T>>> parents,
                     std::function<void(Node<T>&)> backward);

// Reverse-mode sweep from a scalar. Every node reachable from `loss` that
// requires a gradient is visited exactly once, in reverse topological order.
// Parameter gradients accumulate; intermediate gradients are released.
template <typename T>
void Backward(const Tensor<T>& loss);

// Reverse topological order used by Backward, exposed for inspection.
template <typename T>
std::vector<Node<T>*> TopologicalOrder(const Tensor<T>& root);

}  // namespace ambix::nn

#endif  // AMBIX_AUTODIFF_H_
