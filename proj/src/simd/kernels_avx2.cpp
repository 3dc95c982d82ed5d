// Compiled with -mavx2 -mfma. Nothing in here may run before the dispatcher
// has confirmed CPU support.
#include <immintrin.h>

#include <cmath>

#include "fdvae/simd/kernels.hpp"

namespace fdvae::simd::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    _mm256_storeu_pd(y + i + 4,
                     _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
  }
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemm_nn(const double* a, const double* b, const double* bias, double* c,
             std::size_t n, std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    double* ci = c + i * m;
    const double* ai = a + i * k;
    std::size_t j = 0;
    // Register-blocked over 16 output columns.
    for (; j + 16 <= m; j += 16) {
      __m256d c0, c1, c2, c3;
      if (bias != nullptr) {
        c0 = _mm256_loadu_pd(bias + j);
        c1 = _mm256_loadu_pd(bias + j + 4);
        c2 = _mm256_loadu_pd(bias + j + 8);
        c3 = _mm256_loadu_pd(bias + j + 12);
      } else {
        c0 = c1 = c2 = c3 = _mm256_setzero_pd();
      }
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d av = _mm256_set1_pd(ai[p]);
        const double* bp = b + p * m + j;
        c0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bp), c0);
        c1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bp + 4), c1);
        c2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bp + 8), c2);
        c3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bp + 12), c3);
      }
      _mm256_storeu_pd(ci + j, c0);
      _mm256_storeu_pd(ci + j + 4, c1);
      _mm256_storeu_pd(ci + j + 8, c2);
      _mm256_storeu_pd(ci + j + 12, c3);
    }
    for (; j + 4 <= m; j += 4) {
      __m256d c0 = bias != nullptr ? _mm256_loadu_pd(bias + j) : _mm256_setzero_pd();
      for (std::size_t p = 0; p < k; ++p) {
        c0 = _mm256_fmadd_pd(_mm256_set1_pd(ai[p]), _mm256_loadu_pd(b + p * m + j), c0);
      }
      _mm256_storeu_pd(ci + j, c0);
    }
    for (; j < m; ++j) {
      double s = bias != nullptr ? bias[j] : 0.0;
      for (std::size_t p = 0; p < k; ++p) s += ai[p] * b[p * m + j];
      ci[j] = s;
    }
  }
}

void gemm_nt(const double* a, const double* b, double* c,
             std::size_t n, std::size_t m, std::size_t k) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) c[i * k + p] = dot(a + i * m, b + p * m, m);
  }
}

void gemm_tn_acc(const double* a, const double* b, double* c,
                 std::size_t n, std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* ai = a + i * k;
    const double* bi = b + i * m;
    for (std::size_t p = 0; p < k; ++p) axpy(ai[p], bi, c + p * m, m);
  }
}

void adam_update(double* param, double* m, double* v, const double* grad,
                 std::size_t n, const AdamCoefficients& coef) {
  const __m256d b1 = _mm256_set1_pd(coef.beta1);
  const __m256d b2 = _mm256_set1_pd(coef.beta2);
  const __m256d one_b1 = _mm256_set1_pd(1.0 - coef.beta1);
  const __m256d one_b2 = _mm256_set1_pd(1.0 - coef.beta2);
  const __m256d step = _mm256_set1_pd(coef.step_size);
  const __m256d eps = _mm256_set1_pd(coef.epsilon);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_loadu_pd(grad + i);
    const __m256d mi = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(one_b1, g));
    const __m256d vi = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                                     _mm256_mul_pd(_mm256_mul_pd(one_b2, g), g));
    const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vi), eps);
    const __m256d upd = _mm256_div_pd(_mm256_mul_pd(step, mi), denom);
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), upd));
  }
  for (; i < n; ++i) {
    m[i] = coef.beta1 * m[i] + (1.0 - coef.beta1) * grad[i];
    v[i] = coef.beta2 * v[i] + (1.0 - coef.beta2) * grad[i] * grad[i];
    param[i] -= coef.step_size * m[i] / (std::sqrt(v[i]) + coef.epsilon);
  }
}

}  // namespace

const KernelTable& table() noexcept {
  static const KernelTable t{"avx2", dot, axpy, gemm_nn, gemm_nt, gemm_tn_acc, adam_update};
  return t;
}

}  // namespace fdvae::simd::avx2
