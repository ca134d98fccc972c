#include "yopo/adversary.hpp"
#include "yopo/error.hpp"
#include "yopo/instrumentation.hpp"

namespace yopo {

SlackResult compute_slack(const Network& net, const LossFunction& loss, const Tensor& x_plus_eta,
                          const Targets& y, PropCounter* counter) {
  const std::size_t batch = x_plus_eta.rows();
  const Trajectory traj = forward_sweep(net, x_plus_eta, counter);
  const Tensor p_T = terminal_costate(loss, traj.output(), y, batch);
  const Regularizer none = Regularizer::none();
  const CostateTrajectory co = backward_sweep(net, traj, p_T, none, batch, counter);

  SlackResult out;
  out.slack.p = -static_cast<double>(batch) * co.at(net.first_layer_len());
  // The Hamiltonian gradient is the ascent direction; negation is exact.
  out.weight_grad = hamiltonian_theta_grad(net, traj, co, none, batch);
  for (Tensor& g : out.weight_grad) g *= -1.0;
  out.loss = mean_loss(loss, traj.output(), y);
  return out;
}

Perturbation yopo_inner_loop(const Network& net, const Tensor& x, Perturbation eta,
                             const SlackVariable& slack, const AttackConfig& cfg,
                             PropCounter* counter) {
  cfg.validate();
  if (cfg.steps == 0) throw ArgumentError("yopo_inner_loop: need at least one step");
  const std::size_t k0 = net.first_layer_len();
  if (slack.p.rows() != x.rows() || slack.p.cols() != net.split_dim()) {
    throw ShapeError("yopo_inner_loop: slack variable does not match the f_0 output");
  }
  require_same_shape(eta.eta, x, "yopo_inner_loop");
  eta.epsilon = cfg.epsilon;
  for (std::size_t s = 0; s < cfg.steps; ++s) {
    const Trajectory head = forward_range(net, x + eta.eta, 0, k0);
    if (counter) counter->add_first_layer_forward();
    const Tensor g = pullback_range(net, head, 0, slack.p);
    if (counter) counter->add_first_layer_backward();
    ascent_step(eta.eta, g, cfg.step_size, cfg.direction);
    if (cfg.project_each_step) linf_project_inplace(eta.eta, cfg.epsilon);
  }
  if (!cfg.project_each_step) linf_project_inplace(eta.eta, cfg.epsilon);
  return eta;
}

}  // namespace yopo
