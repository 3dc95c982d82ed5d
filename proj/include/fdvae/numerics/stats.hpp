#pragma once

#include <span>
#include <vector>

#include "fdvae/numerics/tensor.hpp"

namespace fdvae::num {

double mean(std::span<const double> v);
// Sample variance (n - 1 denominator); 0 for fewer than two values.
double sample_variance(std::span<const double> v);
double sample_std(std::span<const double> v);

// Sample Pearson correlation. Throws DegenerateInput on zero variance and
// InvalidArgument on length mismatch or fewer than two entries.
double pcc(std::span<const double> a, std::span<const double> b);

// Pearson correlation of average ranks (ties share their mean rank).
double spearman(std::span<const double> a, std::span<const double> b);

struct LinearFit {
  double intercept = 0.0;
  std::vector<double> slopes;
  // Set when the design was rank deficient (or had n <= p) and the ridge
  // fallback with lambda = 1e-6 was used.
  bool ridge_fallback = false;

  double predict(std::span<const double> features) const;
  std::vector<double> predict(const Tensor& features) const;
};

// Ordinary least squares with an intercept. features is [n x p].
LinearFit linear_regression(const Tensor& features, std::span<const double> targets);

}  // namespace fdvae::num
