#include <string>

#include "yopo/error.hpp"
#include "yopo/hamiltonian.hpp"
#include "yopo/instrumentation.hpp"
#include "yopo/kernels.hpp"

namespace yopo {
namespace {

void check_batch(std::size_t batch_size) {
  if (batch_size == 0) throw ArgumentError("batch size must be positive");
}

void check_trajectory(const Network& net, const Trajectory& traj, const char* op) {
  if (traj.states.size() != net.depth() + 1) {
    throw ShapeError(std::string(op) + ": trajectory has " + std::to_string(traj.states.size()) +
                     " states, network needs " + std::to_string(net.depth() + 1));
  }
  for (std::size_t t = 0; t < net.depth(); ++t) {
    if (traj.states[t].cols() != net.layer(t).in_dim) {
      throw ShapeError(std::string(op) + ": state " + std::to_string(t) +
                       " does not match the layer width");
    }
  }
}

double pairing(const Tensor& p, const Tensor& fx) {
  if (p.size() != fx.size()) throw ShapeError("hamiltonian: co-state does not match f_t output");
  return kernels::dot(p.values(), fx.values());
}

}  // namespace

double hamiltonian_value(const LayerSpec& layer, const Tensor& x, const Tensor& p,
                         const Tensor& theta, const Regularizer& reg, std::size_t batch_size) {
  check_batch(batch_size);
  const Tensor fx = layer_forward(layer, theta, x);
  const double slots = static_cast<double>(x.rows());
  return pairing(p, fx) - slots * reg.value(theta) / static_cast<double>(batch_size);
}

double first_layer_hamiltonian(const Network& net, const std::vector<Tensor>& theta0,
                               const Tensor& x, const Tensor& p, const Regularizer& reg,
                               std::size_t batch_size) {
  check_batch(batch_size);
  const std::size_t k0 = net.first_layer_len();
  if (theta0.size() != k0) throw ShapeError("first_layer_hamiltonian: need one tensor per sublayer");
  Tensor state = x;
  double reg_sum = 0.0;
  for (std::size_t t = 0; t < k0; ++t) {
    state = layer_forward(net.layer(t), theta0[t], state);
    reg_sum += reg.value(theta0[t]);
  }
  const double slots = static_cast<double>(x.rows());
  return pairing(p, state) - slots * reg_sum / static_cast<double>(batch_size);
}

Tensor terminal_costate(const LossFunction& loss, const Tensor& x_T, const Targets& y,
                        std::size_t batch_size) {
  check_batch(batch_size);
  Tensor p = loss_gradients(loss, x_T, y);
  const double b = static_cast<double>(batch_size);
  for (double& v : p.values()) v = -(v / b);
  return p;
}

CostateTrajectory backward_sweep(const Network& net, const Trajectory& traj, const Tensor& p_T,
                                 const Regularizer& reg, std::size_t batch_size,
                                 PropCounter* counter) {
  check_batch(batch_size);
  check_trajectory(net, traj, "backward_sweep");
  if (p_T.shape() != traj.output().shape()) {
    throw ShapeError("backward_sweep: terminal co-state does not match the network output");
  }
  // R_t depends on theta only, so grad_x R_t vanishes and the recursion is a pure pullback.
  (void)reg;
  CostateTrajectory out;
  out.costates.resize(net.depth() + 1);
  out.costates.back() = p_T;
  for (std::size_t t = net.depth(); t-- > 0;) {
    out.costates[t] = vjp_x(net.layer(t), net.params(t), traj.states[t], out.costates[t + 1]);
  }
  if (counter) counter->add_full_backward();
  return out;
}

std::vector<Tensor> hamiltonian_theta_grad(const Network& net, const Trajectory& traj,
                                           const CostateTrajectory& costates,
                                           const Regularizer& reg, std::size_t batch_size) {
  check_batch(batch_size);
  check_trajectory(net, traj, "hamiltonian_theta_grad");
  if (costates.costates.size() != traj.states.size()) {
    throw ShapeError("hamiltonian_theta_grad: co-state and state trajectories differ in length");
  }
  std::vector<Tensor> grads(net.depth());
  for (std::size_t t = 0; t < net.depth(); ++t) {
    const LayerSpec& layer = net.layer(t);
    if (layer.kind != LayerKind::affine) continue;
    grads[t] = vjp_theta(layer, net.params(t), traj.states[t], costates.at(t + 1));
    if (reg.kind != Regularizer::Kind::none) grads[t] -= reg.gradient(net.params(t));
  }
  return grads;
}

Trajectory linearized_sweep(const Network& net, const Trajectory& reference,
                            const std::vector<Tensor>& theta_prime, const Tensor& phi0) {
  check_trajectory(net, reference, "linearized_sweep");
  if (theta_prime.size() != net.depth()) {
    throw ShapeError("linearized_sweep: need one parameter tensor per layer");
  }
  if (phi0.shape() != reference.input().shape()) {
    throw ShapeError("linearized_sweep: initial state does not match the reference input");
  }
  Trajectory phi;
  phi.states.reserve(net.depth() + 1);
  phi.states.push_back(phi0);
  for (std::size_t t = 0; t < net.depth(); ++t) {
    const Tensor& x_star = reference.states[t];
    Tensor next = layer_forward(net.layer(t), theta_prime[t], x_star);
    next += jvp_x(net.layer(t), theta_prime[t], x_star, phi.states[t] - x_star);
    phi.states.push_back(std::move(next));
  }
  return phi;
}

double objective_value(const Network& net, const LossFunction& loss, const Regularizer& reg,
                       const Tensor& x, const Targets& y) {
  const Trajectory traj = forward_sweep(net, x);
  double j = mean_loss(loss, traj.output(), y);
  for (const Tensor& theta : net.params()) j += reg.value(theta);
  return j;
}

ObjectiveGradient objective_gradient(const Network& net, const LossFunction& loss,
                                     const Regularizer& reg, const Tensor& x, const Targets& y,
                                     PropCounter* counter) {
  const Trajectory traj = forward_sweep(net, x, counter);
  ObjectiveGradient out;
  out.objective = mean_loss(loss, traj.output(), y);
  for (const Tensor& theta : net.params()) out.objective += reg.value(theta);

  const double b = static_cast<double>(traj.output().rows());
  Tensor delta = loss_gradients(loss, traj.output(), y);
  for (double& v : delta.values()) v = v / b;

  out.theta.resize(net.depth());
  for (std::size_t t = net.depth(); t-- > 0;) {
    const LayerSpec& layer = net.layer(t);
    if (layer.kind == LayerKind::affine) {
      out.theta[t] = vjp_theta(layer, net.params(t), traj.states[t], delta);
      if (reg.kind != Regularizer::Kind::none) out.theta[t] += reg.gradient(net.params(t));
    }
    delta = vjp_x(layer, net.params(t), traj.states[t], delta);
  }
  out.input = std::move(delta);
  if (counter) counter->add_full_backward();
  return out;
}

}  // namespace yopo
