#pragma once
// Log-densities, Gaussian KL and the reparameterised sample, in plain scalar
// form and as tape primitives with closed-form local gradients.

#include "fdvae/numerics/tape.hpp"

namespace fdvae::num {

double gaussian_log_density(double x, double mu, double log_var) noexcept;
// Numerically stable x*log(sigmoid(l)) + (1-x)*log(1-sigmoid(l)); x in {0,1}.
double bernoulli_log_density(double x, double logit) noexcept;
double kl_diag_gaussians(double mu_q, double log_var_q, double mu_p, double log_var_p) noexcept;
double sigmoid(double x) noexcept;
double softplus(double x) noexcept;

// Elementwise -0.5 * (log 2pi + log_var + (x - mu)^2 * exp(-log_var)).
Var gaussian_log_density(Var x, Var mu, Var log_var);
// Throws InvalidArgument if any entry of x is not exactly 0 or 1. No
// gradient flows into x.
Var bernoulli_log_density(Var x, Var logits);
// Per-dimension KL(N(mu_q, exp(lv_q)) || N(mu_p, exp(lv_p))).
Var kl_diag_gaussians(Var mu_q, Var log_var_q, Var mu_p, Var log_var_p);
// mu + exp(0.5 * log_var) * eps; eps enters as data.
Var reparameterize(Var mu, Var log_var, const Tensor& eps);

}  // namespace fdvae::num
