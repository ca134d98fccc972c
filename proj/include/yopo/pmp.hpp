#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "json.hpp"
#include "yopo/adversary.hpp"

namespace yopo {

struct PmpConfig {
  std::size_t samples = 1000;
  // Half-width of the l_inf box around theta*_t from which theta'_t is drawn.
  double radius = 0.1;
  double tolerance = 1e-6;
  std::uint64_t seed = 0;
};

struct ViolationCount {
  std::size_t layer = 0;
  std::size_t violations = 0;
  std::size_t samples = 0;
  // Largest H(candidate) - H(optimum) observed (positive means the candidate did better).
  double max_gap = 0.0;

  double rate() const noexcept {
    return samples == 0 ? 0.0 : static_cast<double>(violations) / static_cast<double>(samples);
  }
};

struct PmpReport {
  std::vector<ViolationCount> per_layer;  // parameterised layers only
  ViolationCount adversary;
  double tolerance = 0.0;
  double radius = 0.0;
  std::uint64_t seed = 0;

  std::size_t weight_violations() const noexcept;
  double weight_violation_rate() const noexcept;
};

// Samples the layerwise maximum conditions at the trained point:
//   weight side: sum_i H_t(x*, p*, theta*_t) >= sum_i H_t(x*, p*, theta'_t) - tol
//                for theta'_t uniform in the radius box around theta*_t;
//   adversary:   sum_i H_0(x + eta, p*, theta*_0) >= sum_i H_0(x + eta*, p*, theta*_0) - tol
//                for eta uniform in the eps-ball (the adversary minimises H_0).
// Reports only; never throws on violations.
PmpReport verify_pmp(const Network& net, const LossFunction& loss, const Regularizer& reg,
                     const Tensor& x, const Targets& y, const Perturbation& eta_star,
                     const PmpConfig& cfg);

nlohmann::json to_json(const PmpReport& report);

}  // namespace yopo
