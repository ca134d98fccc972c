#include "yopo/finite_diff.hpp"

#include <cmath>
#include <string>

#include "yopo/error.hpp"

namespace yopo {

Tensor finite_diff_grad(const ScalarFunction& f, const Tensor& x, double h) {
  if (!(h > 0.0)) throw ArgumentError("finite_diff_grad: step must be positive");
  Tensor probe = x;
  Tensor grad = zeros_like(x);
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double original = probe[k];
    probe[k] = original + h;
    const double up = f(probe);
    probe[k] = original - h;
    const double down = f(probe);
    probe[k] = original;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw EvaluationError("finite_diff_grad: non-finite value at coordinate " + std::to_string(k));
    }
    grad[k] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace yopo
