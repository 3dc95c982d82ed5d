#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include "fdvae/numerics/tensor.hpp"

namespace fdvae::est {

enum class Method { frontdoor_plugin, backdoor_regression, naive_diff_means };

std::string_view to_string(Method m);

struct AteEstimate {
  double value = 0.0;
  Method method = Method::naive_diff_means;
  std::size_t n_treated = 0;
  std::size_t n_control = 0;
  // Either per-arm outcome regression fell back to ridge.
  bool ridge_fallback = false;
};

struct RegressionOptions {
  // Adds every pairwise product (and square) of the features.
  bool quadratic_features = false;
};

// Empirical front-door plug-in on a representation psi [n x d]:
//   m_t'(psi) = per-arm linear fit of y on psi,
//   mu(psi)   = sum_t' m_t'(psi) * P^(t'),
//   estimate  = mean of mu over treated rows - mean over control rows.
AteEstimate ate_frontdoor_plugin(const num::Tensor& psi, std::span<const double> t, std::span<const double> y,
                                 RegressionOptions opts = {});

// Per-arm regressions f_t'(x); estimate = mean over all rows of f_1 - f_0.
AteEstimate ate_backdoor_regression(const num::Tensor& x, std::span<const double> t, std::span<const double> y,
                                    RegressionOptions opts = {});

AteEstimate naive_diff_means(std::span<const double> t, std::span<const double> y);

// |(estimate - truth) / truth| * 100. DegenerateInput when truth is 0.
double estimation_bias(double estimate, double truth);

}  // namespace fdvae::est
