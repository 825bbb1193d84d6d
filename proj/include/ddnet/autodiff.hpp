#pragma once

// Reverse-mode differentiation over a recorded tape.
//
// A Tape owns every value produced during a forward computation. Ops append
// a node holding the output value and a closure that pushes the output
// gradient back to the node's inputs. Nodes are appended in evaluation
// order, so replaying them in reverse is a valid topological order.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "ddnet/tensor.hpp"

namespace ddnet {

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid while its Tape lives.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  /// dLoss/dValue after Tape::backward. Zero tensor until then.
  const Tensor& grad() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;

  Tape* tape() const noexcept { return tape_; }
  std::size_t id() const noexcept { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  /// Receives the output gradient and accumulates into the inputs.
  using Backprop = std::function<void(Tape&, const Tensor& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Tensor value, bool requires_grad = false);
  /// Appends an op output. The node needs a gradient iff any input does.
  Var record(Tensor value, std::span<const Var> inputs, Backprop backprop);

  /// Propagates d(loss)/d(.) to every reachable node that requires a gradient.
  /// Leaf gradients accumulate across calls until zero_grad().
  void backward(Var loss);
  void zero_grad();
  /// Drops every node recorded after the first `size` ones. Handles to the
  /// dropped nodes become invalid. Lets a bound model be reused per sample.
  void truncate(std::size_t size);

  /// Adds `g` into the gradient of `v`. No-op when `v` does not require one.
  void accumulate(Var v, std::span<const double> g);
  /// Mutable gradient buffer of `v` (allocated on first use).
  std::span<double> grad_buffer(Var v);

  const Tensor& value(Var v) const { return nodes_[v.id_].value; }
  const Tensor& grad(Var v);
  bool requires_grad(Var v) const { return nodes_[v.id_].requires_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    Backprop backprop;  // empty for leaves
  };

  void ensure_grad(Node& node);
  void check_owner(Var v) const;

  std::vector<Node> nodes_;
};

// Differentiable ops. All inputs must live on the same tape.

/// Cross-correlation with zero padding.
/// input [C_in x H x W], weight [C_out x C_in x k x k], bias [C_out].
Var conv2d(Var input, Var weight, Var bias, std::size_t padding);
/// input [n], weight [m x n], bias [m] -> [m].
Var linear(Var input, Var weight, Var bias);
Var sigmoid(Var x);
/// max(0, x); the subgradient at 0 is 0.
Var relu(Var x);
Var add(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var x, double factor);
/// Channels [begin, begin + count) of a [C x H x W] tensor.
Var slice_channels(Var x, std::size_t begin, std::size_t count);
/// Rank-1 view of any tensor.
Var flatten(Var x);
/// Concatenation of two rank-1 tensors.
Var concat(Var a, Var b);
/// Sum of same-shape tensors.
Var sum(std::span<const Var> terms);
/// Scalar loss -log softmax(logits)[label] for a 2-class logit vector.
Var softmax_cross_entropy(Var logits, std::size_t label);

/// Numerically stable softmax of a plain tensor (no tape).
std::vector<double> softmax(std::span<const double> logits);

}  // namespace ddnet
