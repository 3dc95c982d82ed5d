#pragma once
// Differentiable primitives recorded on a Tape.
//
// Elementwise binary ops broadcast an operand of shape [1 x m], [n x 1] or
// [1 x 1] against an [n x m] partner; any other mismatch is an
// InvalidArgument naming both shapes.

#include <span>
#include <string_view>

#include "fdvae/numerics/tape.hpp"

namespace fdvae::num {

enum class Activation { identity, relu, elu, tanh };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view s);

// x[n x in] * w[in x out] + b[1 x out]
Var affine(Var x, Var w, Var b);
Var matmul(Var a, Var b);
Var activation(Var x, Activation tag);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var x, double s);
Var exp(Var x);
// Hard clamp; gradient is zero where the input lies outside [lo, hi].
Var clamp(Var x, double lo, double hi);

Var concat_cols(std::span<const Var> xs);
Var slice_cols(Var x, std::size_t begin, std::size_t count);

// Row sums: [n x m] -> [n x 1].
Var sum_cols(Var x);
Var sum(Var x);
Var mean(Var x);

}  // namespace fdvae::num
