#include "yopo/error.hpp"
#include "yopo/kernels.hpp"
#include "yopo/training.hpp"

namespace yopo {

void sgd_update(Tensor& theta, const Tensor& grad, double lr, double momentum, double weight_decay,
                Tensor& velocity) {
  require_same_shape(theta, grad, "sgd_update");
  if (velocity.empty()) velocity = zeros_like(theta);
  require_same_shape(theta, velocity, "sgd_update velocity");
  for (std::size_t i = 0; i < theta.size(); ++i) {
    velocity[i] = momentum * velocity[i] + grad[i] + weight_decay * theta[i];
  }
  kernels::axpy(-lr, velocity.values(), theta.values());
}

void sgd_update(std::vector<Tensor>& theta, const std::vector<Tensor>& grad, double lr,
                double momentum, double weight_decay, SgdState& state) {
  if (theta.size() != grad.size()) throw ShapeError("sgd_update: layer counts differ");
  state.velocity.resize(theta.size());
  for (std::size_t t = 0; t < theta.size(); ++t) {
    if (theta[t].empty()) continue;
    sgd_update(theta[t], grad[t], lr, momentum, weight_decay, state.velocity[t]);
  }
}

}  // namespace yopo
