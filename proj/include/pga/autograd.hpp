#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "pga/tensor.hpp"

namespace pga {

/// A learnable tensor and its accumulated gradient.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  /// Set when a backward pass reached this parameter; cleared by zero_grad().
  bool has_grad = false;

  Parameter() = default;
  Parameter(std::string name, Tensor value);

  void zero_grad();
};

class Tape;

/// Handle to a value recorded on a Tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
};

/// Reverse-mode recording of one forward computation.
///
/// Nodes are appended in evaluation order, so the node vector is already a
/// topological order and backward() is a single reverse sweep. A tape is
/// single-writer; build a fresh one per forward pass.
class Tape {
 public:
  /// Propagates the node's output gradient into its inputs via accumulate().
  using BackwardFn = std::function<void(Tape& tape, const Tensor& grad_out)>;

  Var constant(Tensor value);
  /// Leaf whose gradient is written back into `p.grad` by backward().
  Var parameter(Parameter& p);

  Var record(std::string_view op, std::vector<std::size_t> inputs, Tensor value, BackwardFn backward);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  const std::string& op(std::size_t id) const { return nodes_[id].op; }
  std::size_t size() const { return nodes_.size(); }

  /// Adds `g` into the pending gradient of node `id`. No-op for constants.
  void accumulate(std::size_t id, const Tensor& g);
  /// Mutable pending gradient for in-place accumulation (allocated on demand).
  Tensor& grad_buffer(std::size_t id);

  /// Gradient of the last backward() with respect to `v`; zeros if unreached.
  Tensor grad(Var v) const;

  /// Sweeps the tape in reverse from a scalar loss, seeding d(loss) = seed.
  /// Parameter gradients are added to what is already there, so calling
  /// backward twice without zero_grad() doubles them.
  void backward(Var loss, double seed = 1.0);

 private:
  struct Node {
    std::string op;
    std::vector<std::size_t> inputs;
    Tensor value;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
    BackwardFn backward;
    Parameter* param = nullptr;
  };

  // deque: values stay addressable while later nodes are appended
  std::deque<Node> nodes_;
};

void zero_grads(const std::vector<Parameter*>& params);

}  // namespace pga
