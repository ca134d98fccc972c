#include <cmath>
#include <string>

#include "yopo/adversary.hpp"
#include "yopo/error.hpp"
#include "yopo/instrumentation.hpp"
#include "yopo/kernels.hpp"

namespace yopo {

std::string_view direction_name(Direction d) noexcept {
  return d == Direction::sign ? "sign" : "raw_gradient";
}

Direction parse_direction(std::string_view name) {
  if (name == "sign") return Direction::sign;
  if (name == "raw_gradient" || name == "raw") return Direction::raw_gradient;
  throw ArgumentError("unknown attack direction '" + std::string(name) + "'");
}

std::string_view init_name(Init i) noexcept { return i == Init::zero ? "zero" : "uniform"; }

Init parse_init(std::string_view name) {
  if (name == "zero") return Init::zero;
  if (name == "uniform") return Init::uniform;
  throw ArgumentError("unknown attack init '" + std::string(name) + "'");
}

void AttackConfig::validate() const {
  if (!(epsilon >= 0.0)) throw ArgumentError("attack epsilon must be non-negative");
  if (!(step_size >= 0.0)) throw ArgumentError("attack step size must be non-negative");
}

void linf_project_inplace(Tensor& eta, double epsilon) {
  if (!(epsilon >= 0.0)) throw ArgumentError("linf_project: epsilon must be non-negative");
  kernels::clamp(eta.values(), -epsilon, epsilon);
}

Tensor linf_project(const Tensor& eta, double epsilon) {
  Tensor out = eta;
  linf_project_inplace(out, epsilon);
  return out;
}

bool is_feasible(const Tensor& eta, double epsilon) noexcept {
  for (double v : eta.values()) {
    if (!(std::abs(v) <= epsilon)) return false;
  }
  return true;
}

Tensor initial_perturbation(const Tensor& x, double epsilon, Init init, Rng& rng) {
  if (!(epsilon >= 0.0)) throw ArgumentError("perturbation epsilon must be non-negative");
  if (init == Init::zero) return zeros_like(x);
  return sample_uniform(rng, x.shape(), -epsilon, epsilon);
}

void ascent_step(Tensor& eta, const Tensor& g, double step, Direction direction) {
  require_same_shape(eta, g, "ascent_step");
  if (direction == Direction::sign) {
    kernels::add_sign(step, g.values(), eta.values());
  } else {
    kernels::axpy(step, g.values(), eta.values());
  }
}

Tensor input_gradient(const Network& net, const LossFunction& loss, const Tensor& x,
                      const Targets& y, PropCounter* counter) {
  const std::size_t batch = x.rows();
  const Trajectory traj = forward_sweep(net, x, counter);
  const Tensor p_T = terminal_costate(loss, traj.output(), y, batch);
  const CostateTrajectory co = backward_sweep(net, traj, p_T, Regularizer::none(), batch, counter);
  return -static_cast<double>(batch) * co.at(0);
}

Perturbation pgd_attack(const Network& net, const LossFunction& loss, const Tensor& x,
                        const Targets& y, const AttackConfig& cfg, Rng& rng, PropCounter* counter) {
  cfg.validate();
  Perturbation out{initial_perturbation(x, cfg.epsilon, cfg.init, rng), cfg.epsilon};
  for (std::size_t s = 0; s < cfg.steps; ++s) {
    const Tensor g = input_gradient(net, loss, x + out.eta, y, counter);
    ascent_step(out.eta, g, cfg.step_size, cfg.direction);
    if (cfg.project_each_step) linf_project_inplace(out.eta, cfg.epsilon);
  }
  if (!cfg.project_each_step) linf_project_inplace(out.eta, cfg.epsilon);
  return out;
}

}  // namespace yopo
