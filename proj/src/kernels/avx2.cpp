// Compiled with -mavx2 -mfma. Keep this translation unit free of inline
// templates shared with the rest of the library (std::min, std::clamp, ...):
// the linker may otherwise keep the AVX2 instantiation for every caller.
#include <immintrin.h>

#include "yopo/kernels.hpp"

namespace yopo::kernels {
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
  __m256d acc2 = _mm256_setzero_pd();
  __m256d acc3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), acc2);
    acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), acc3);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
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

void gemv(const double* w, std::size_t rows, std::size_t cols, const double* x, const double* bias,
          double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double s = dot(w + r * cols, x, cols);
    y[r] = bias ? s + bias[r] : s;
  }
}

void gemv_t(const double* w, std::size_t rows, std::size_t cols, const double* v, double* y) {
  for (std::size_t c = 0; c < cols; ++c) y[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) axpy(v[r], w + r * cols, y, cols);
}

void ger(double alpha, const double* v, std::size_t rows, const double* x, std::size_t cols,
         double* g) {
  for (std::size_t r = 0; r < rows; ++r) axpy(alpha * v[r], x, g + r * cols, cols);
}

void clamp(double* x, std::size_t n, double lo, double hi) {
  // Operand order reproduces the scalar select semantics for signed zeros and NaN.
  const __m256d vlo = _mm256_set1_pd(lo);
  const __m256d vhi = _mm256_set1_pd(hi);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_max_pd(vlo, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(x + i, _mm256_min_pd(vhi, v));
  }
  for (; i < n; ++i) {
    double v = x[i] < lo ? lo : x[i];
    x[i] = v > hi ? hi : v;
  }
}

void add_sign(double step, const double* g, double* y, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d up = _mm256_set1_pd(step);
  const __m256d down = _mm256_set1_pd(-step);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vg = _mm256_loadu_pd(g + i);
    const __m256d vy = _mm256_loadu_pd(y + i);
    const __m256d pos = _mm256_cmp_pd(vg, zero, _CMP_GT_OQ);
    const __m256d neg = _mm256_cmp_pd(vg, zero, _CMP_LT_OQ);
    const __m256d with_up = _mm256_add_pd(vy, up);
    const __m256d with_down = _mm256_add_pd(vy, down);
    __m256d out = _mm256_blendv_pd(vy, with_up, pos);
    out = _mm256_blendv_pd(out, with_down, neg);
    _mm256_storeu_pd(y + i, out);
  }
  for (; i < n; ++i) {
    if (g[i] > 0.0) {
      y[i] += step;
    } else if (g[i] < 0.0) {
      y[i] -= step;
    }
  }
}

constexpr Table kAvx2{Backend::avx2, "avx2", dot, axpy, gemv, gemv_t, ger, clamp, add_sign};

}  // namespace

const Table* avx2_table() noexcept { return &kAvx2; }

}  // namespace yopo::kernels
