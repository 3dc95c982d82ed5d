#include "fdvae/numerics/distributions.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "broadcast.hpp"
#include "fdvae/error.hpp"

namespace fdvae::num {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Broadcasting N-ary elementwise op. grad(args, y) returns the local partials.
template <std::size_t N, class F, class G>
Var elementwise(const char* name, std::array<Var, N> in, std::array<bool, N> differentiable, F f, G grad) {
  std::array<const Tensor*, N> vals{};
  for (std::size_t k = 0; k < N; ++k) vals[k] = &in[k].value();
  detail::BroadcastShape shape{};
  if constexpr (N == 2) {
    shape = detail::resolve_shape(name, {vals[0], vals[1]});
  } else if constexpr (N == 3) {
    shape = detail::resolve_shape(name, {vals[0], vals[1], vals[2]});
  } else {
    shape = detail::resolve_shape(name, {vals[0], vals[1], vals[2], vals[3]});
  }
  std::array<detail::BroadcastIndex, N> idx{};
  for (std::size_t k = 0; k < N; ++k) idx[k] = detail::index_for(*vals[k], shape);

  Tensor y(shape.rows, shape.cols);
  std::array<double, N> args{};
  for (std::size_t r = 0; r < shape.rows; ++r) {
    for (std::size_t c = 0; c < shape.cols; ++c) {
      for (std::size_t k = 0; k < N; ++k) args[k] = (*vals[k])[idx[k](r, c)];
      y(r, c) = f(args);
    }
  }
  std::array<std::size_t, N> ids{};
  std::vector<Var> inputs;
  for (std::size_t k = 0; k < N; ++k) {
    ids[k] = in[k].id();
    if (differentiable[k]) inputs.push_back(in[k]);
  }
  Tape& tape = in[0].tape();
  if (inputs.empty()) return tape.constant(std::move(y));
  return tape.record(std::move(y), inputs, [=](Tape& t, std::size_t self) {
    const Tensor& dy = t.grad_buffer(self);
    const Tensor& yv = t.value(self);
    std::array<Tensor*, N> g{};
    std::array<const Tensor*, N> v{};
    for (std::size_t k = 0; k < N; ++k) {
      v[k] = &t.value(ids[k]);
      g[k] = (differentiable[k] && t.requires_grad(ids[k])) ? &t.grad_buffer(ids[k]) : nullptr;
    }
    std::array<double, N> a{};
    for (std::size_t r = 0; r < shape.rows; ++r) {
      for (std::size_t c = 0; c < shape.cols; ++c) {
        for (std::size_t k = 0; k < N; ++k) a[k] = (*v[k])[idx[k](r, c)];
        const std::array<double, N> d = grad(a, yv(r, c));
        const double up = dy(r, c);
        for (std::size_t k = 0; k < N; ++k) {
          if (g[k] != nullptr) (*g[k])[idx[k](r, c)] += up * d[k];
        }
      }
    }
  });
}

}  // namespace

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) noexcept { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double gaussian_log_density(double x, double mu, double log_var) noexcept {
  const double d = x - mu;
  return -0.5 * (kLog2Pi + log_var + d * d * std::exp(-log_var));
}

double bernoulli_log_density(double x, double logit) noexcept { return x * logit - softplus(logit); }

double kl_diag_gaussians(double mu_q, double log_var_q, double mu_p, double log_var_p) noexcept {
  const double d = mu_q - mu_p;
  return 0.5 * (log_var_p - log_var_q + std::exp(log_var_q - log_var_p) + d * d * std::exp(-log_var_p) - 1.0);
}

Var gaussian_log_density(Var x, Var mu, Var log_var) {
  return elementwise<3>(
      "gaussian_log_density", {x, mu, log_var}, {true, true, true},
      [](const std::array<double, 3>& a) { return gaussian_log_density(a[0], a[1], a[2]); },
      [](const std::array<double, 3>& a, double) {
        const double d = a[0] - a[1];
        const double prec = std::exp(-a[2]);
        return std::array<double, 3>{-d * prec, d * prec, -0.5 * (1.0 - d * d * prec)};
      });
}

Var bernoulli_log_density(Var x, Var logits) {
  for (double v : x.value().values()) {
    if (v != 0.0 && v != 1.0) {
      throw InvalidArgument("bernoulli_log_density: observation " + std::to_string(v) + " is not 0 or 1");
    }
  }
  return elementwise<2>(
      "bernoulli_log_density", {x, logits}, {false, true},
      [](const std::array<double, 2>& a) { return bernoulli_log_density(a[0], a[1]); },
      [](const std::array<double, 2>& a, double) {
        return std::array<double, 2>{0.0, a[0] - sigmoid(a[1])};
      });
}

Var kl_diag_gaussians(Var mu_q, Var log_var_q, Var mu_p, Var log_var_p) {
  return elementwise<4>(
      "kl_diag_gaussians", {mu_q, log_var_q, mu_p, log_var_p}, {true, true, true, true},
      [](const std::array<double, 4>& a) { return kl_diag_gaussians(a[0], a[1], a[2], a[3]); },
      [](const std::array<double, 4>& a, double) {
        const double d = a[0] - a[2];
        const double inv_p = std::exp(-a[3]);
        const double ratio = std::exp(a[1] - a[3]);
        return std::array<double, 4>{d * inv_p, 0.5 * (ratio - 1.0), -d * inv_p,
                                     0.5 * (1.0 - ratio - d * d * inv_p)};
      });
}

Var reparameterize(Var mu, Var log_var, const Tensor& eps) {
  Var e = mu.tape().constant(eps);
  return elementwise<3>(
      "reparameterize", {mu, log_var, e}, {true, true, false},
      [](const std::array<double, 3>& a) { return a[0] + std::exp(0.5 * a[1]) * a[2]; },
      [](const std::array<double, 3>& a, double) {
        return std::array<double, 3>{1.0, 0.5 * std::exp(0.5 * a[1]) * a[2], 0.0};
      });
}

}  // namespace fdvae::num
