#include "fdvae/numerics/adam.hpp"

#include <cmath>

#include "fdvae/error.hpp"
#include "fdvae/simd/kernels.hpp"

namespace fdvae::num {

AdamState::AdamState(const ParameterSet& params, AdamOptions opts) : options(opts) {
  if (!(opts.learning_rate > 0.0)) throw InvalidArgument("adam: learning rate must be positive");
  first_moment.reserve(params.size());
  second_moment.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    first_moment.emplace_back(params.value(i).rows(), params.value(i).cols());
    second_moment.emplace_back(params.value(i).rows(), params.value(i).cols());
  }
}

void adam_step(ParameterSet& params, std::span<const Tensor> grads, AdamState& state) {
  if (grads.size() != params.size() || state.first_moment.size() != params.size()) {
    throw InvalidArgument("adam: gradient/state count does not match parameter count");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!grads[i].same_shape(params.value(i))) {
      throw InvalidArgument("adam: gradient shape " + grads[i].shape_string() + " for '" + params.name(i) +
                            "' does not match " + params.value(i).shape_string());
    }
    if (!grads[i].all_finite()) {
      throw TrainingDivergence("non-finite gradient in parameter block '" + params.name(i) + "'",
                               params.name(i));
    }
  }
  state.step += 1;
  const auto& o = state.options;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(o.beta1, t);
  const double bc2_sqrt = std::sqrt(1.0 - std::pow(o.beta2, t));
  const simd::AdamCoefficients coef{o.learning_rate * bc2_sqrt / bc1, o.beta1, o.beta2, o.epsilon * bc2_sqrt};
  const auto& k = simd::active();
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params.value(i);
    k.adam_update(p.data(), state.first_moment[i].data(), state.second_moment[i].data(), grads[i].data(),
                  p.size(), coef);
  }
}

}  // namespace fdvae::num
