#include "pga/autograd.hpp"

#include <stdexcept>

#include "pga/simd/kernels.hpp"

namespace pga {

Parameter::Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}

void Parameter::zero_grad() {
  grad.fill(0.0);
  has_grad = false;
}

void zero_grads(const std::vector<Parameter*>& params) {
  for (Parameter* p : params) p->zero_grad();
}

const Tensor& Var::value() const { return tape->value(id); }

Var Tape::constant(Tensor value) {
  Node node;
  node.op = "constant";
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return {this, nodes_.size() - 1};
}

Var Tape::parameter(Parameter& p) {
  if (p.grad.shape() != p.value.shape()) {
    throw ShapeError("parameter '" + p.name + "' grad shape " + shape_str(p.grad.shape()) +
                     " differs from value shape " + shape_str(p.value.shape()));
  }
  Node node;
  node.op = "parameter";
  node.value = p.value;
  node.requires_grad = true;
  node.param = &p;
  nodes_.push_back(std::move(node));
  return {this, nodes_.size() - 1};
}

Var Tape::record(std::string_view op, std::vector<std::size_t> inputs, Tensor value, BackwardFn backward) {
  Node node;
  node.op = std::string(op);
  for (auto id : inputs) {
    if (id >= nodes_.size()) throw std::logic_error("tape input recorded out of order");
    node.requires_grad = node.requires_grad || nodes_[id].requires_grad;
  }
  node.inputs = std::move(inputs);
  node.value = std::move(value);
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return {this, nodes_.size() - 1};
}

Tensor& Tape::grad_buffer(std::size_t id) {
  Node& node = nodes_[id];
  if (!node.has_grad) {
    node.grad = Tensor(node.value.shape());
    node.has_grad = true;
  }
  return node.grad;
}

void Tape::accumulate(std::size_t id, const Tensor& g) {
  if (!nodes_[id].requires_grad) return;
  Tensor& buf = grad_buffer(id);
  if (buf.shape() != g.shape()) {
    throw ShapeError("gradient " + shape_str(g.shape()) + " does not match node '" + nodes_[id].op + "' " +
                     shape_str(buf.shape()));
  }
  simd::active_kernels().axpy(g.numel(), 1.0, g.raw(), buf.raw());
}

Tensor Tape::grad(Var v) const {
  const Node& node = nodes_[v.id];
  return node.has_grad ? node.grad : Tensor(node.value.shape());
}

void Tape::backward(Var loss, double seed) {
  if (loss.tape != this) throw std::invalid_argument("loss was recorded on a different tape");
  if (value(loss).numel() != 1) {
    throw ShapeError("backward needs a scalar loss, got " + shape_str(value(loss).shape()));
  }
  for (Node& node : nodes_) {
    node.has_grad = false;
    node.grad = Tensor();
  }
  if (!nodes_[loss.id].requires_grad) return;
  grad_buffer(loss.id)[0] = seed;

  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.has_grad) continue;
    if (node.param) {
      Parameter& p = *node.param;
      simd::active_kernels().axpy(p.grad.numel(), 1.0, node.grad.raw(), p.grad.raw());
      p.has_grad = true;
    } else if (node.backward) {
      // callbacks only touch inputs, which precede the node, so its grad can be lent out
      Tensor g = std::move(node.grad);
      node.backward(*this, g);
      node.grad = std::move(g);
    }
  }
}

}  // namespace pga
