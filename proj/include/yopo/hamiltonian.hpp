#pragma once

#include <cstddef>
#include <vector>

#include "yopo/dynamics.hpp"
#include "yopo/loss.hpp"

namespace yopo {

class PropCounter;

// Co-states p_t, t = 0..T, each a batch [B, d_t]. For the trajectory of a
// batch of size B:
//   p_T = -(1/B) grad l_i(x_T),   p_t = grad_x f_t(x_t)^T p_{t+1} - (1/B) grad_x R_t.
struct CostateTrajectory {
  std::vector<Tensor> costates;

  const Tensor& at(std::size_t t) const { return costates.at(t); }
};

// Sum over the rows of x/p of H_t = p . f_t(x, theta_t) - (1/B) R_t(x, theta_t).
// For a single example (rank-1 x and p) this is H_t itself.
double hamiltonian_value(const LayerSpec& layer, const Tensor& x, const Tensor& p,
                         const Tensor& theta, const Regularizer& reg, std::size_t batch_size);

// The same for the composite first layer f_0 (layers [0, k0)) with parameters
// theta0 (one tensor per sublayer); p is the co-state at the f_0 output.
double first_layer_hamiltonian(const Network& net, const std::vector<Tensor>& theta0,
                               const Tensor& x, const Tensor& p, const Regularizer& reg,
                               std::size_t batch_size);

// -(1/B) grad l_i(x_T) for each example.
Tensor terminal_costate(const LossFunction& loss, const Tensor& x_T, const Targets& y,
                        std::size_t batch_size);

// Backward co-state sweep; counts one full backward per call.
CostateTrajectory backward_sweep(const Network& net, const Trajectory& traj, const Tensor& p_T,
                                 const Regularizer& reg, std::size_t batch_size,
                                 PropCounter* counter = nullptr);

// grad_theta sum_i H_t(x_{i,t}, p_{i,t+1}, theta_t) for every layer t. The
// regularizer enters once per example slot with weight 1/B, i.e. as the full
// grad R_t. Parameter-free layers give the empty tensor.
std::vector<Tensor> hamiltonian_theta_grad(const Network& net, const Trajectory& traj,
                                           const CostateTrajectory& costates,
                                           const Regularizer& reg, std::size_t batch_size);

// phi_{t+1} = f_t(x*_t, theta'_t) + grad_x f_t(x*_t, theta'_t) (phi_t - x*_t).
Trajectory linearized_sweep(const Network& net, const Trajectory& reference,
                            const std::vector<Tensor>& theta_prime, const Tensor& phi0);

// Training objective J = (1/B) sum_i l_i(x_{i,T}) + sum_t R_t(theta_t).
double objective_value(const Network& net, const LossFunction& loss, const Regularizer& reg,
                       const Tensor& x, const Targets& y);

// Gradient of J by plain reverse-mode differentiation (descent direction).
// Kept independent of the co-state/Hamiltonian route so the two can be
// compared; counts one full forward and one full backward.
struct ObjectiveGradient {
  double objective = 0.0;
  std::vector<Tensor> theta;  // grad_theta_t J per layer
  Tensor input;               // grad_{x_0} J, per example
};

ObjectiveGradient objective_gradient(const Network& net, const LossFunction& loss,
                                     const Regularizer& reg, const Tensor& x, const Targets& y,
                                     PropCounter* counter = nullptr);

}  // namespace yopo
