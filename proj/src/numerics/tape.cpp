#include "fdvae/numerics/tape.hpp"

#include "fdvae/error.hpp"

namespace fdvae::num {

const Tensor& Var::value() const { return tape_->value(id_); }

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, {}, false, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::variable(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, {}, true, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn) {
  bool needs = false;
  for (const Var& v : inputs) {
    if (&v.tape() != this) throw InvalidArgument("tape: input recorded on another tape");
    needs = needs || nodes_[v.id()].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), {}, needs ? std::move(fn) : BackwardFn{}, needs, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, const std::vector<Var>& inputs, BackwardFn fn) {
  bool needs = false;
  for (const Var& v : inputs) {
    if (&v.tape() != this) throw InvalidArgument("tape: input recorded on another tape");
    needs = needs || nodes_[v.id()].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), {}, needs ? std::move(fn) : BackwardFn{}, needs, false});
  return Var(this, nodes_.size() - 1);
}

Tensor& Tape::grad_buffer(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    n.grad = Tensor(n.value.rows(), n.value.cols());
    n.has_grad = true;
  }
  return n.grad;
}

const Tensor& Tape::grad(Var v) { return grad_buffer(v.id()); }

void Tape::backward(Var output) {
  if (&output.tape() != this) throw InvalidArgument("backward: output recorded on another tape");
  const Tensor& out = nodes_[output.id()].value;
  if (out.rows() != 1 || out.cols() != 1) {
    throw InvalidArgument("backward: output must be scalar, got " + out.shape_string());
  }
  if (backward_done_) throw InvalidArgument("backward: tape already consumed");
  backward_done_ = true;
  grad_buffer(output.id())[0] = 1.0;
  for (std::size_t i = output.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad || !n.backward) continue;
    n.backward(*this, i);
  }
}

}  // namespace fdvae::num
