#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Data-parallel inner loops used by the layers and attacks.
//
// Every kernel has a scalar reference implementation and, where the host
// supports it, a SIMD variant (AVX2+FMA on x86-64, NEON on AArch64). The
// active table is chosen once at first use from CPUID / build target and can
// be forced with the YOPO_KERNELS environment variable (scalar|avx2|neon) or
// select(). Results are deterministic for a fixed backend; reductions and
// FMA contractions mean backends agree to rounding, not bit-for-bit, except
// for the purely elementwise kernels (clamp, add_sign) which are exact.
namespace yopo::kernels {

enum class Backend { scalar, avx2, neon };

struct Table {
  Backend backend;
  const char* name;

  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = W x (+ bias if non-null); W is rows x cols row-major
  void (*gemv)(const double* w, std::size_t rows, std::size_t cols, const double* x,
               const double* bias, double* y);
  // y = W^T v; W is rows x cols row-major, y has cols entries (overwritten)
  void (*gemv_t)(const double* w, std::size_t rows, std::size_t cols, const double* v, double* y);
  // G += alpha * v x^T; G is rows x cols row-major
  void (*ger)(double alpha, const double* v, std::size_t rows, const double* x, std::size_t cols,
              double* g);
  // x[i] = min(max(x[i], lo), hi)
  void (*clamp)(double* x, std::size_t n, double lo, double hi);
  // y[i] += step * sign(g[i]) with sign(0) = 0
  void (*add_sign)(double step, const double* g, double* y, std::size_t n);
};

const Table& scalar_table() noexcept;
// nullptr when the variant was not compiled for this target.
const Table* avx2_table() noexcept;
const Table* neon_table() noexcept;

bool available(Backend b) noexcept;
Backend detect() noexcept;

// Active table. Selection is process-global; call select() only while no
// kernel is running.
const Table& active() noexcept;
void select(Backend b);

std::string_view backend_name(Backend b) noexcept;

// Span conveniences over the active table.
inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), y.size());
}
inline void clamp(std::span<double> x, double lo, double hi) {
  active().clamp(x.data(), x.size(), lo, hi);
}
inline void add_sign(double step, std::span<const double> g, std::span<double> y) {
  active().add_sign(step, g.data(), y.data(), y.size());
}

}  // namespace yopo::kernels
