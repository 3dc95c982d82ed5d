#include <cmath>

#include "fdvae/simd/kernels.hpp"

namespace fdvae::simd {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemm_nn_scalar(const double* a, const double* b, const double* bias, double* c,
                    std::size_t n, std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    double* ci = c + i * m;
    if (bias != nullptr) {
      for (std::size_t j = 0; j < m; ++j) ci[j] = bias[j];
    } else {
      for (std::size_t j = 0; j < m; ++j) ci[j] = 0.0;
    }
    const double* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) axpy_scalar(ai[p], b + p * m, ci, m);
  }
}

void gemm_nt_scalar(const double* a, const double* b, double* c,
                    std::size_t n, std::size_t m, std::size_t k) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) c[i * k + p] = dot_scalar(a + i * m, b + p * m, m);
  }
}

void gemm_tn_acc_scalar(const double* a, const double* b, double* c,
                        std::size_t n, std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* ai = a + i * k;
    const double* bi = b + i * m;
    for (std::size_t p = 0; p < k; ++p) axpy_scalar(ai[p], bi, c + p * m, m);
  }
}

void adam_update_scalar(double* param, double* m, double* v, const double* grad,
                        std::size_t n, const AdamCoefficients& coef) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = coef.beta1 * m[i] + (1.0 - coef.beta1) * grad[i];
    v[i] = coef.beta2 * v[i] + (1.0 - coef.beta2) * grad[i] * grad[i];
    param[i] -= coef.step_size * m[i] / (std::sqrt(v[i]) + coef.epsilon);
  }
}

}  // namespace

const KernelTable& scalar_kernels() noexcept {
  static const KernelTable table{
      "scalar",     dot_scalar,         axpy_scalar,        gemm_nn_scalar,
      gemm_nt_scalar, gemm_tn_acc_scalar, adam_update_scalar,
  };
  return table;
}

}  // namespace fdvae::simd
