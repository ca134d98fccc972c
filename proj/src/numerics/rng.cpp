#include "yopo/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "yopo/error.hpp"

namespace yopo {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) {
  if (lo > hi) throw ArgumentError("uniform: lo > hi");
  if (lo == hi) return lo;
  return std::min(hi, lo + (hi - lo) * uniform01());
}

double Rng::normal() {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {
__extension__ using u128 = unsigned __int128;
}  // namespace

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw ArgumentError("index: empty range");
  const std::uint64_t range = n;
  u128 product = static_cast<u128>(next_u64()) * range;
  auto low = static_cast<std::uint64_t>(product);
  if (low < range) {
    const std::uint64_t threshold = (0 - range) % range;
    while (low < threshold) {
      product = static_cast<u128>(next_u64()) * range;
      low = static_cast<std::uint64_t>(product);
    }
  }
  return static_cast<std::size_t>(product >> 64);
}

Rng Rng::split(std::uint64_t stream) const {
  return Rng(splitmix64(seed_ ^ (stream * 0x9E3779B97F4A7C15ULL)));
}

Tensor sample_uniform(Rng& rng, std::vector<std::size_t> shape, double lo, double hi) {
  if (lo > hi) throw ArgumentError("sample_uniform: lo > hi");
  Tensor out(std::move(shape));
  for (double& v : out.values()) v = rng.uniform(lo, hi);
  return out;
}

}  // namespace yopo
