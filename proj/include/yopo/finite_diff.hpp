#pragma once

#include <functional>

#include "yopo/tensor.hpp"

namespace yopo {

inline constexpr double kDefaultFdStep = 1e-5;

using ScalarFunction = std::function<double(const Tensor&)>;

// Central-difference gradient: (f(x + h e_k) - f(x - h e_k)) / (2h) per coordinate.
// Throws EvaluationError naming the coordinate if any probe is non-finite.
Tensor finite_diff_grad(const ScalarFunction& f, const Tensor& x, double h = kDefaultFdStep);

}  // namespace yopo
