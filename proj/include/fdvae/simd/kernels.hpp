#pragma once
// Dense double-precision inner loops used by the autodiff engine and the
// optimiser. Each kernel has a scalar reference implementation and, on
// x86-64 builds, an AVX2+FMA variant. The variant is chosen once at runtime
// from CPUID; setting FDVAE_SIMD=scalar in the environment forces the
// reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace fdvae::simd {

struct AdamCoefficients {
  double step_size;   // lr * sqrt(1 - beta2^t) / (1 - beta1^t)
  double beta1;
  double beta2;
  double epsilon;     // already scaled by sqrt(1 - beta2^t)
};

struct KernelTable {
  std::string_view name;

  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // c[n x m] = a[n x k] * b[k x m]  (+ bias[m] broadcast over rows when non-null)
  void (*gemm_nn)(const double* a, const double* b, const double* bias, double* c,
                  std::size_t n, std::size_t k, std::size_t m);
  // c[n x k] = a[n x m] * b[k x m]^T
  void (*gemm_nt)(const double* a, const double* b, double* c,
                  std::size_t n, std::size_t m, std::size_t k);
  // c[k x m] += a[n x k]^T * b[n x m]
  void (*gemm_tn_acc)(const double* a, const double* b, double* c,
                      std::size_t n, std::size_t k, std::size_t m);
  // In-place Adam moment update and parameter step.
  void (*adam_update)(double* param, double* m, double* v, const double* grad,
                      std::size_t n, const AdamCoefficients& coef);
};

const KernelTable& scalar_kernels() noexcept;

// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels() noexcept;

// The table selected at first use; stable for the lifetime of the process.
const KernelTable& active() noexcept;

// Convenience wrappers over active().
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace fdvae::simd
