#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fdvae/numerics/mlp.hpp"

namespace fdvae::num {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamState() = default;
  AdamState(const ParameterSet& params, AdamOptions opts);

  AdamOptions options;
  std::uint64_t step = 0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
};

// One bias-corrected Adam update. Every gradient is checked before any
// parameter moves; a non-finite entry throws TrainingDivergence naming the
// parameter block and leaves params and state untouched.
void adam_step(ParameterSet& params, std::span<const Tensor> grads, AdamState& state);

}  // namespace fdvae::num
