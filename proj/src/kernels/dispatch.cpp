#include <atomic>
#include <cstdlib>
#include <string>
#include <string_view>

#include "yopo/error.hpp"
#include "yopo/kernels.hpp"

namespace yopo::kernels {

#ifndef YOPO_HAVE_AVX2_TU
const Table* avx2_table() noexcept { return nullptr; }
#endif
#ifndef YOPO_HAVE_NEON_TU
const Table* neon_table() noexcept { return nullptr; }
#endif

namespace {

bool cpu_has_avx2() noexcept {
#if defined(YOPO_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Table* lookup(Backend b) noexcept {
  switch (b) {
    case Backend::scalar:
      return &scalar_table();
    case Backend::avx2:
      return cpu_has_avx2() ? avx2_table() : nullptr;
    case Backend::neon:
      return neon_table();  // NEON is mandatory on AArch64
  }
  return nullptr;
}

const Table* initial_table() noexcept {
  if (const char* env = std::getenv("YOPO_KERNELS")) {
    const std::string_view name(env);
    for (Backend b : {Backend::scalar, Backend::avx2, Backend::neon}) {
      if (name == backend_name(b)) {
        if (const Table* t = lookup(b)) return t;
      }
    }
  }
  return lookup(detect());
}

std::atomic<const Table*>& current() noexcept {
  static std::atomic<const Table*> table{initial_table()};
  return table;
}

}  // namespace

bool available(Backend b) noexcept { return lookup(b) != nullptr; }

Backend detect() noexcept {
  if (available(Backend::avx2)) return Backend::avx2;
  if (available(Backend::neon)) return Backend::neon;
  return Backend::scalar;
}

const Table& active() noexcept { return *current().load(std::memory_order_relaxed); }

void select(Backend b) {
  const Table* t = lookup(b);
  if (!t) throw ArgumentError("kernel backend '" + std::string(backend_name(b)) + "' unavailable");
  current().store(t, std::memory_order_relaxed);
}

std::string_view backend_name(Backend b) noexcept {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
    case Backend::neon:
      return "neon";
  }
  return "unknown";
}

}  // namespace yopo::kernels
