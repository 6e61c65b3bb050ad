#include "comatcher/core/autodiff.h"

#include "comatcher/core/error.h"

namespace comatcher {
namespace ad {

const Tensor2& Var::value() const { return tape_->value(id_); }

Tape::Tape(bool record_gradients) : record_(record_gradients) {}

Var Tape::Constant(Tensor2 value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::Parameter(const ParamStore& store, const std::string& name) {
  const auto it = parameter_nodes_.find(name);
  if (it != parameter_nodes_.end()) {
    return Var(this, it->second);
  }
  Node node;
  node.value = store.value(name);
  node.needs_grad = record_;
  nodes_.push_back(std::move(node));
  const int id = static_cast<int>(nodes_.size()) - 1;
  parameter_nodes_.emplace(name, id);
  return Var(this, id);
}

Var Tape::Record(Tensor2 value, const std::vector<Var>& inputs,
                 BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  if (record_) {
    for (const Var& input : inputs) {
      if (input.tape_ != this) {
        throw Error("foreign-variable", "input recorded on another tape");
      }
      node.needs_grad = node.needs_grad || needs_grad(input.id_);
    }
    if (node.needs_grad) {
      node.backward = std::move(backward);
    }
  }
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Tensor2& Tape::mutable_grad(int id) {
  Node& node = nodes_[id];
  if (node.grad.size() == 0 && node.value.size() != 0) {
    node.grad = Tensor2::Zero(node.value.rows(), node.value.cols());
  }
  return node.grad;
}

void Tape::Backward(Var root) {
  if (!record_) {
    throw Error("no-gradient-tape", "tape was built without gradients");
  }
  if (root.tape_ != this || root.value().size() != 1) {
    throw Error("shape-mismatch", "backward root must be a 1x1 value");
  }
  for (Node& node : nodes_) {
    node.grad.resize(0, 0);
  }
  mutable_grad(root.id_).setOnes();
  for (int id = root.id_; id >= 0; --id) {
    Node& node = nodes_[id];
    if (node.grad.size() == 0 || !node.backward) {
      continue;
    }
    node.backward(*this, id);
  }
}

void Tape::AccumulateParameterGradients(ParamStore* store) const {
  for (const auto& [name, id] : parameter_nodes_) {
    const Tensor2& g = nodes_[id].grad;
    if (g.size() != 0) {
      store->mutable_grad(name) += g;
    }
  }
}

std::map<std::string, Tensor2> Tape::ParameterGradients() const {
  std::map<std::string, Tensor2> grads;
  for (const auto& [name, id] : parameter_nodes_) {
    const Tensor2& g = nodes_[id].grad;
    grads[name] = g.size() != 0
                      ? g
                      : Tensor2::Zero(nodes_[id].value.rows(),
                                      nodes_[id].value.cols());
  }
  return grads;
}

}  // namespace ad
}  // namespace comatcher
