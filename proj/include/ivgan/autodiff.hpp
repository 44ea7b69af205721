#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "ivgan/tensor.hpp"

namespace ivgan {

using NodeId = std::size_t;
class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape
// lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, NodeId id) : tape_(tape), id_(id) {}

  NodeId id() const { return id_; }
  Tape& tape() const { return *tape_; }
  const Tensor& value() const;
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  NodeId id_ = 0;
};

struct BackwardArgs {
  const Tensor& out_value;
  const Tensor& grad_out;
  std::span<const Tensor* const> in_values;
  // Null for inputs that do not need a gradient. Accumulate with +=.
  std::span<Tensor* const> in_grads;
};

using BackwardFn = std::function<void(const BackwardArgs&)>;

// Gradients of one scalar w.r.t. every node of a tape, indexed by node id.
class Gradients {
 public:
  explicit Gradients(std::vector<Tensor> grads) : grads_(std::move(grads)) {}

  bool has(NodeId id) const { return id < grads_.size() && !grads_[id].empty(); }
  // Gradient of node `id`; a zero tensor of the node's dims when the loss
  // does not depend on it.
  Tensor of(const Tape& tape, NodeId id) const;
  Tensor of(Var v) const { return of(v.tape(), v.id()); }

 private:
  std::vector<Tensor> grads_;
};

// Records primitive operations in topological order for reverse-mode
// differentiation. Confined to one thread.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Differentiable input.
  Var leaf(Tensor value);
  // Input that never receives a gradient.
  Var constant(Tensor value);
  Var record(Tensor value, std::vector<NodeId> inputs, BackwardFn fn);

  const Tensor& value(NodeId id) const { return nodes_[id].value; }
  bool requires_grad(NodeId id) const { return nodes_[id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Gradient of a single-element node w.r.t. every node that feeds it.
  Gradients backward(Var loss) const;

  // When enabled, piecewise-linear ops log their pre-activation inputs so
  // callers can detect evaluations that straddle a kink.
  void set_kink_tracking(bool on) { track_kinks_ = on; }
  bool kink_tracking() const { return track_kinks_; }
  void note_kinks(std::span<const double> inputs);
  const std::vector<double>& kink_inputs() const { return kinks_; }

 private:
  struct Node {
    Tensor value;
    std::vector<NodeId> inputs;
    BackwardFn backward;
    bool requires_grad = false;
  };

  std::vector<Node> nodes_;
  bool track_kinks_ = false;
  std::vector<double> kinks_;
};

}  // namespace ivgan
