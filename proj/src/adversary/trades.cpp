#include <cmath>

#include "yopo/adversary.hpp"
#include "yopo/error.hpp"
#include "yopo/instrumentation.hpp"

namespace yopo {
namespace {

void check_logits(const Tensor& clean, const Tensor& adv) {
  if (clean.rows() != adv.rows() || clean.cols() != adv.cols()) {
    throw ShapeError("consistency loss: clean and adversarial logits differ in shape");
  }
}

// Runs the co-state sweep from a per-example terminal gradient g_i (unscaled)
// and returns the co-states.
CostateTrajectory costates_from_gradient(const Network& net, const Trajectory& traj,
                                         Tensor grad, PropCounter* counter) {
  const std::size_t batch = traj.output().rows();
  const double b = static_cast<double>(batch);
  for (double& v : grad.values()) v = -(v / b);
  return backward_sweep(net, traj, grad, Regularizer::none(), batch, counter);
}

}  // namespace

double mean_consistency_loss(const Tensor& clean_logits, const Tensor& adv_logits) {
  check_logits(clean_logits, adv_logits);
  double s = 0.0;
  for (std::size_t i = 0; i < clean_logits.rows(); ++i) {
    s += kl_divergence(clean_logits.row(i), adv_logits.row(i));
  }
  return s / static_cast<double>(clean_logits.rows());
}

Tensor kl_grad_adv(const Tensor& clean_logits, const Tensor& adv_logits) {
  check_logits(clean_logits, adv_logits);
  Tensor g = zeros_like(adv_logits);
  for (std::size_t i = 0; i < adv_logits.rows(); ++i) {
    const auto q = softmax(clean_logits.row(i));
    const auto q_adv = softmax(adv_logits.row(i));
    auto row = g.row(i);
    for (std::size_t k = 0; k < row.size(); ++k) row[k] = q_adv[k] - q[k];
  }
  return g;
}

Tensor kl_grad_clean(const Tensor& clean_logits, const Tensor& adv_logits) {
  check_logits(clean_logits, adv_logits);
  Tensor g = zeros_like(clean_logits);
  for (std::size_t i = 0; i < clean_logits.rows(); ++i) {
    const auto q = softmax(clean_logits.row(i));
    const auto q_adv = softmax(adv_logits.row(i));
    std::vector<double> a(q.size());
    double mean_a = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
      a[k] = std::log(q[k]) - std::log(q_adv[k]);
      mean_a += q[k] * a[k];
    }
    auto row = g.row(i);
    for (std::size_t k = 0; k < row.size(); ++k) row[k] = q[k] * (a[k] - mean_a);
  }
  return g;
}

Tensor trades_attack(const Network& net, const Tensor& x, const Tensor& clean_logits,
                     const AttackConfig& cfg, Rng& rng, PropCounter* counter) {
  cfg.validate();
  if (cfg.direction != Direction::sign) throw ArgumentError("trades_attack uses sign steps");
  const std::size_t batch = x.rows();
  Tensor eta = initial_perturbation(x, cfg.epsilon, cfg.init, rng);
  for (std::size_t s = 0; s < cfg.steps; ++s) {
    const Trajectory traj = forward_sweep(net, x + eta, counter);
    const CostateTrajectory co =
        costates_from_gradient(net, traj, kl_grad_adv(clean_logits, traj.output()), counter);
    const Tensor g = -static_cast<double>(batch) * co.at(0);
    ascent_step(eta, g, cfg.step_size, Direction::sign);
    if (cfg.project_each_step) linf_project_inplace(eta, cfg.epsilon);
  }
  if (!cfg.project_each_step) linf_project_inplace(eta, cfg.epsilon);
  return x + eta;
}

SlackVariable consistency_slack(const Network& net, const Tensor& clean_logits,
                                const Tensor& x_plus_eta, PropCounter* counter) {
  const std::size_t batch = x_plus_eta.rows();
  const Trajectory traj = forward_sweep(net, x_plus_eta, counter);
  const CostateTrajectory co =
      costates_from_gradient(net, traj, kl_grad_adv(clean_logits, traj.output()), counter);
  return {-static_cast<double>(batch) * co.at(net.first_layer_len())};
}

}  // namespace yopo
