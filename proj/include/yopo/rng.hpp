#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "yopo/tensor.hpp"

namespace yopo {

// Seeded generator with a platform-stable stream.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. Real-valued draws are derived here (not through <random>
// distributions, whose algorithms are implementation-defined):
//   uniform01  = (next_u64 >> 11) * 2^-53
//   normal     = Box-Muller on two uniform01 draws, cosine branch only
//   index(n)   = Lemire's multiply-shift with rejection
// Streams are split with splitmix64(seed ^ (stream * golden_gamma)).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64();
  double uniform01();
  double uniform(double lo, double hi);
  double normal();
  std::size_t index(std::size_t n);

  // Independent child generator; does not advance this one.
  Rng split(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

Tensor sample_uniform(Rng& rng, std::vector<std::size_t> shape, double lo, double hi);

}  // namespace yopo
