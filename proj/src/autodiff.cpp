#include "ivgan/autodiff.hpp"

#include "ivgan/errors.hpp"

namespace ivgan {

const Tensor& Var::value() const { return tape_->value(id_); }

Tensor Gradients::of(const Tape& tape, NodeId id) const {
  if (has(id)) return grads_[id];
  return Tensor(tape.value(id).dims());
}

Var Tape::leaf(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, nullptr, true});
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, nullptr, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::vector<NodeId> inputs, BackwardFn fn) {
  bool needs = false;
  for (NodeId in : inputs) {
    if (in >= nodes_.size()) throw ContractError("tape input refers to a future node");
    needs = needs || nodes_[in].requires_grad;
  }
  if (!needs) fn = nullptr;
  nodes_.push_back(Node{std::move(value), std::move(inputs), std::move(fn), needs});
  return Var(this, nodes_.size() - 1);
}

void Tape::note_kinks(std::span<const double> inputs) {
  if (track_kinks_) kinks_.insert(kinks_.end(), inputs.begin(), inputs.end());
}

Gradients Tape::backward(Var loss) const {
  if (&loss.tape() != this) throw ContractError("loss belongs to a different tape");
  const Tensor& out = nodes_[loss.id()].value;
  if (out.size() != 1) {
    throw ContractError("backward requires a scalar loss, got dims " +
                        dims_to_string(out.dims()));
  }

  std::vector<Tensor> grads(loss.id() + 1);
  grads[loss.id()] = Tensor(out.dims(), 1.0);

  std::vector<const Tensor*> in_values;
  std::vector<Tensor*> in_grads;
  for (NodeId id = loss.id() + 1; id-- > 0;) {
    const Node& node = nodes_[id];
    if (grads[id].empty() || !node.backward) continue;
    in_values.clear();
    in_grads.clear();
    for (NodeId in : node.inputs) {
      in_values.push_back(&nodes_[in].value);
      if (nodes_[in].requires_grad) {
        if (grads[in].empty()) grads[in] = Tensor(nodes_[in].value.dims());
        in_grads.push_back(&grads[in]);
      } else {
        in_grads.push_back(nullptr);
      }
    }
    node.backward(BackwardArgs{node.value, grads[id], in_values, in_grads});
  }
  return Gradients(std::move(grads));
}

}  // namespace ivgan
