#pragma once

#include <span>
#include <string>
#include <vector>

#include "fdvae/numerics/ops.hpp"
#include "fdvae/numerics/rng.hpp"
#include "fdvae/numerics/tape.hpp"

namespace fdvae::num {

// Named, ordered collection of parameter tensors owned by a model.
class ParameterSet {
 public:
  std::size_t add(std::string name, Tensor value);

  std::size_t size() const noexcept { return values_.size(); }
  const std::string& name(std::size_t i) const { return names_[i]; }
  const Tensor& value(std::size_t i) const { return values_[i]; }
  Tensor& value(std::size_t i) { return values_[i]; }
  // Throws InvalidArgument for unknown names.
  std::size_t index(const std::string& name) const;

  bool all_finite() const noexcept;
  std::size_t scalar_count() const noexcept;

  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
};

// Exposes a ParameterSet on one Tape. Leaves are created on first use, so
// parameters a given loss never touches get a zero gradient.
class ParameterBinding {
 public:
  ParameterBinding(Tape& tape, const ParameterSet& params, bool trainable = true);

  Var operator[](std::size_t i);
  Tape& tape() noexcept { return tape_; }
  // Call after tape.backward(); one tensor per parameter, aligned with the set.
  std::vector<Tensor> gradients();

 private:
  Tape& tape_;
  const ParameterSet& params_;
  bool trainable_;
  std::vector<Var> bound_;
  std::vector<bool> is_bound_;
};

struct MlpLayer {
  std::size_t weight = 0;  // [in x out]
  std::size_t bias = 0;    // [1 x out]
};

// Fully-connected network: hidden layers use `hidden` activation, output linear.
struct MlpParams {
  std::vector<MlpLayer> layers;
  Activation hidden = Activation::elu;
  std::size_t in = 0;
  std::size_t out = 0;

  // Weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  static MlpParams create(ParameterSet& params, const std::string& prefix, std::size_t in,
                          std::span<const std::size_t> hidden_widths, std::size_t out,
                          Activation hidden, Pcg64& rng);

  Var forward(ParameterBinding& bind, Var x) const;
};

}  // namespace fdvae::num
