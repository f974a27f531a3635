#pragma once

#include <functional>
#include <memory>
#include <unordered_set>
#include <utility>
#include <vector>

#include "edgerec/common/error.hpp"
#include "edgerec/numeric/tensor.hpp"

namespace edgerec::numeric {

/// While any guard is alive on this thread, ops skip recording backward
/// closures. Used for inference on frozen parameters.
class NoGradGuard {
 public:
  NoGradGuard() : previous_(enabled()) { enabled() = false; }
  ~NoGradGuard() { enabled() = previous_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

  static bool& enabled() {
    thread_local bool flag = true;
    return flag;
  }

 private:
  bool previous_;
};

/// One value in a reverse-mode computation graph. `backward` reads this
/// node's gradient and accumulates into the gradients of `parents`.
template <typename Real>
struct Node {
  Tensor<Real> value;
  Tensor<Real> grad;
  bool has_grad = false;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  Tensor<Real>& grad_buffer() {
    if (!has_grad) {
      grad = Tensor<Real>(value.shape(), Real(0));
      has_grad = true;
    }
    return grad;
  }
};

/// Handle to a graph node. Copies share the node.
template <typename Real>
class Var {
 public:
  using value_type = Real;

  Var() = default;
  explicit Var(std::shared_ptr<Node<Real>> node) : node_(std::move(node)) {}

  static Var constant(Tensor<Real> value) {
    auto node = std::make_shared<Node<Real>>();
    node->value = std::move(value);
    return Var(std::move(node));
  }

  static Var leaf(Tensor<Real> value) {
    auto node = std::make_shared<Node<Real>>();
    node->value = std::move(value);
    node->requires_grad = true;
    return Var(std::move(node));
  }

  bool defined() const { return static_cast<bool>(node_); }
  const Tensor<Real>& value() const { return node_->value; }
  Tensor<Real>& mutable_value() { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  bool requires_grad() const { return node_->requires_grad; }
  Node<Real>* node() const { return node_.get(); }
  const std::shared_ptr<Node<Real>>& shared() const { return node_; }

  /// Gradient accumulated so far; zeros when nothing reached this node.
  Tensor<Real> grad() const {
    if (node_->has_grad) return node_->grad;
    return Tensor<Real>(node_->value.shape(), Real(0));
  }

  void zero_grad() {
    node_->grad = Tensor<Real>();
    node_->has_grad = false;
  }

  /// Back-propagates from this node with seed gradient `seed` (ones when omitted).
  void backward(const Tensor<Real>* seed = nullptr) const;

 private:
  std::shared_ptr<Node<Real>> node_;
};

template <typename Real>
void Var<Real>::backward(const Tensor<Real>* seed) const {
  if (!node_->requires_grad) return;

  std::vector<Node<Real>*> order;
  std::unordered_set<Node<Real>*> visited;
  std::vector<std::pair<Node<Real>*, std::size_t>> stack{{node_.get(), 0}};
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [current, next] = stack.back();
    if (next < current->parents.size()) {
      Node<Real>* parent = current->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) stack.push_back({parent, 0});
    } else {
      order.push_back(current);
      stack.pop_back();
    }
  }

  Tensor<Real>& root = node_->grad_buffer();
  if (seed) {
    if (seed->shape() != root.shape()) throw ShapeError("backward seed shape mismatch");
    for (std::size_t i = 0; i < root.size(); ++i) root[i] += (*seed)[i];
  } else {
    for (std::size_t i = 0; i < root.size(); ++i) root[i] += Real(1);
  }

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<Real>* n = *it;
    if (n->backward && n->has_grad) n->backward(*n);
  }
}

}  // namespace edgerec::numeric
