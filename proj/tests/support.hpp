#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "fdvae/numerics/rng.hpp"
#include "fdvae/numerics/tape.hpp"
#include "fdvae/numerics/tensor.hpp"

namespace testsupport {

using fdvae::num::Tape;
using fdvae::num::Tensor;
using fdvae::num::Var;

inline Tensor random_tensor(std::size_t r, std::size_t c, fdvae::num::Pcg64& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(r, c);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

// Scalar-valued function of a list of leaf tensors, expressed on a tape.
using TapeFn = std::function<Var(Tape&, const std::vector<Var>&)>;

inline double evaluate(const TapeFn& f, const std::vector<Tensor>& inputs) {
  Tape tape;
  std::vector<Var> vars;
  for (const auto& t : inputs) vars.push_back(tape.constant(t));
  return f(tape, vars).value()[0];
}

// Largest |analytic - central difference| over every input entry, scaled by
// max(1, |numeric|).
inline double gradient_error(const TapeFn& f, const std::vector<Tensor>& inputs, double h = 1e-6) {
  Tape tape;
  std::vector<Var> vars;
  for (const auto& t : inputs) vars.push_back(tape.variable(t));
  Var out = f(tape, vars);
  tape.backward(out);
  double worst = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Tensor analytic = tape.grad(vars[k]);
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      auto plus = inputs;
      auto minus = inputs;
      plus[k][i] += h;
      minus[k][i] -= h;
      const double numeric = (evaluate(f, plus) - evaluate(f, minus)) / (2.0 * h);
      const double err = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(numeric));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace testsupport
