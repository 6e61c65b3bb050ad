#pragma once

#include <deque>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "comatcher/core/param_store.h"
#include "comatcher/core/tensor.h"

namespace comatcher {
namespace ad {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape
// lives.
class Var {
 public:
  Var() = default;

  const Tensor2& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Reverse-mode tape. Nodes are appended in evaluation order, which is a
// topological order, so the backward sweep walks the node list once from the
// end. A tape built with record_gradients=false stores values only.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape& tape, int self)>;

  explicit Tape(bool record_gradients = true);
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var Constant(Tensor2 value);
  // Leaf bound to a named entry of `store`. Repeated requests for the same
  // name return the same leaf.
  Var Parameter(const ParamStore& store, const std::string& name);
  Var Record(Tensor2 value, const std::vector<Var>& inputs,
             BackwardFn backward);

  // Seeds d(root)/d(root) = 1 for a 1x1 root and propagates. Gradients from
  // a previous sweep are discarded first, so repeated calls are identical.
  void Backward(Var root);

  const Tensor2& value(int id) const { return nodes_[id].value; }
  // Gradient of a node after Backward; an empty matrix if unreached.
  const Tensor2& grad(int id) const { return nodes_[id].grad; }
  Tensor2& mutable_grad(int id);
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }
  bool recording() const { return record_; }
  size_t size() const { return nodes_.size(); }

  // Adds the gradient of every parameter leaf into store->grad(name).
  void AccumulateParameterGradients(ParamStore* store) const;
  // Parameter gradients keyed by name (zero where unreached).
  std::map<std::string, Tensor2> ParameterGradients() const;

 private:
  struct Node {
    Tensor2 value;
    Tensor2 grad;
    bool needs_grad = false;
    BackwardFn backward;
  };

  bool record_;
  std::deque<Node> nodes_;
  std::map<std::string, int> parameter_nodes_;
};

}  // namespace ad
}  // namespace comatcher
