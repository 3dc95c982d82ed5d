#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "fdvae/numerics/tensor.hpp"

namespace fdvae::num {

class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape& tape() const { return *tape_; }
  std::size_t id() const noexcept { return id_; }
  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Records operations in execution order; backward() walks them in reverse,
// so every node is visited once and after all of its consumers.
class Tape {
 public:
  // Called with the tape and the node's own id; reads grad(id) and
  // accumulates into the gradients of the node's inputs.
  using BackwardFn = std::function<void(Tape&, std::size_t)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var variable(Tensor value);

  // Appends an op result. The node requires a gradient iff any input does;
  // otherwise fn is dropped.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn);
  Var record(Tensor value, const std::vector<Var>& inputs, BackwardFn fn);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  const Tensor& value(Var v) const { return nodes_[v.id()].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }

  // Gradient of the last backward() output w.r.t. v; zeros when v did not
  // contribute.
  const Tensor& grad(Var v);
  // Accumulation target used by backward rules; allocated on first use.
  Tensor& grad_buffer(std::size_t id);

  // Reverse-mode sweep from a 1x1 output. May be called once per tape.
  void backward(Var output);

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    BackwardFn backward;
    bool requires_grad = false;
    bool has_grad = false;
  };
  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace fdvae::num
