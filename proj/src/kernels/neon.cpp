#include <arm_neon.h>

#include "yopo/kernels.hpp"

namespace yopo::kernels {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  float64x2_t acc2 = vdupq_n_f64(0.0);
  float64x2_t acc3 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    acc2 = vfmaq_f64(acc2, vld1q_f64(a + i + 4), vld1q_f64(b + i + 4));
    acc3 = vfmaq_f64(acc3, vld1q_f64(a + i + 6), vld1q_f64(b + i + 6));
  }
  for (; i + 2 <= n; i += 2) acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
  double s = vaddvq_f64(vaddq_f64(vaddq_f64(acc0, acc1), vaddq_f64(acc2, acc3)));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
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
  const float64x2_t vlo = vdupq_n_f64(lo);
  const float64x2_t vhi = vdupq_n_f64(hi);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t v = vld1q_f64(x + i);
    v = vbslq_f64(vcltq_f64(v, vlo), vlo, v);
    v = vbslq_f64(vcgtq_f64(v, vhi), vhi, v);
    vst1q_f64(x + i, v);
  }
  for (; i < n; ++i) {
    double v = x[i] < lo ? lo : x[i];
    x[i] = v > hi ? hi : v;
  }
}

void add_sign(double step, const double* g, double* y, std::size_t n) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  const float64x2_t up = vdupq_n_f64(step);
  const float64x2_t down = vdupq_n_f64(-step);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t vg = vld1q_f64(g + i);
    const float64x2_t vy = vld1q_f64(y + i);
    float64x2_t out = vbslq_f64(vcgtq_f64(vg, zero), vaddq_f64(vy, up), vy);
    out = vbslq_f64(vcltq_f64(vg, zero), vaddq_f64(vy, down), out);
    vst1q_f64(y + i, out);
  }
  for (; i < n; ++i) {
    if (g[i] > 0.0) {
      y[i] += step;
    } else if (g[i] < 0.0) {
      y[i] -= step;
    }
  }
}

constexpr Table kNeon{Backend::neon, "neon", dot, axpy, gemv, gemv_t, ger, clamp, add_sign};

}  // namespace

const Table* neon_table() noexcept { return &kNeon; }

}  // namespace yopo::kernels
