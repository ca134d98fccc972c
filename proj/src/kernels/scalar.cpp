#include "yopo/kernels.hpp"

namespace yopo::kernels {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
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
  for (std::size_t i = 0; i < n; ++i) {
    double v = x[i] < lo ? lo : x[i];
    x[i] = v > hi ? hi : v;
  }
}

void add_sign(double step, const double* g, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (g[i] > 0.0) {
      y[i] += step;
    } else if (g[i] < 0.0) {
      y[i] -= step;
    }
  }
}

constexpr Table kScalar{Backend::scalar, "scalar", dot, axpy, gemv, gemv_t, ger, clamp, add_sign};

}  // namespace

const Table& scalar_table() noexcept { return kScalar; }

}  // namespace yopo::kernels
