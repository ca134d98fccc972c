#include "yopo/pmp.hpp"

#include <algorithm>
#include <limits>

#include "yopo/error.hpp"

namespace yopo {

std::size_t PmpReport::weight_violations() const noexcept {
  std::size_t n = 0;
  for (const auto& l : per_layer) n += l.violations;
  return n;
}

double PmpReport::weight_violation_rate() const noexcept {
  std::size_t v = 0;
  std::size_t s = 0;
  for (const auto& l : per_layer) {
    v += l.violations;
    s += l.samples;
  }
  return s == 0 ? 0.0 : static_cast<double>(v) / static_cast<double>(s);
}

PmpReport verify_pmp(const Network& net, const LossFunction& loss, const Regularizer& reg,
                     const Tensor& x, const Targets& y, const Perturbation& eta_star,
                     const PmpConfig& cfg) {
  if (!(cfg.radius >= 0.0)) throw ArgumentError("verify_pmp: radius must be non-negative");
  require_same_shape(x, eta_star.eta, "verify_pmp");
  const std::size_t batch = x.rows();

  const Tensor x0_star = x + eta_star.eta;
  const Trajectory traj = forward_sweep(net, x0_star);
  const Tensor p_T = terminal_costate(loss, traj.output(), y, batch);
  const CostateTrajectory co = backward_sweep(net, traj, p_T, reg, batch);

  PmpReport report;
  report.tolerance = cfg.tolerance;
  report.radius = cfg.radius;
  report.seed = cfg.seed;

  const Rng root(cfg.seed);
  for (std::size_t t = 0; t < net.depth(); ++t) {
    const LayerSpec& layer = net.layer(t);
    if (layer.param_count() == 0) continue;
    Rng rng = root.split(t + 1);
    const Tensor& theta_star = net.params(t);
    const double h_star = hamiltonian_value(layer, traj.states[t], co.at(t + 1), theta_star, reg, batch);
    ViolationCount vc{t, 0, cfg.samples, -std::numeric_limits<double>::infinity()};
    Tensor candidate = theta_star;
    for (std::size_t s = 0; s < cfg.samples; ++s) {
      for (std::size_t j = 0; j < candidate.size(); ++j) {
        candidate[j] = theta_star[j] + rng.uniform(-cfg.radius, cfg.radius);
      }
      const double h = hamiltonian_value(layer, traj.states[t], co.at(t + 1), candidate, reg, batch);
      vc.max_gap = std::max(vc.max_gap, h - h_star);
      if (h_star < h - cfg.tolerance) ++vc.violations;
    }
    if (cfg.samples == 0) vc.max_gap = 0.0;
    report.per_layer.push_back(vc);
  }

  // Adversary side: eta* should minimise the first-layer Hamiltonian over the ball.
  const std::size_t k0 = net.first_layer_len();
  const std::vector<Tensor> theta0(net.params().begin(), net.params().begin() + k0);
  const Tensor& p_split = co.at(k0);
  const double h0_star = first_layer_hamiltonian(net, theta0, x0_star, p_split, reg, batch);
  Rng rng = root.split(0);
  ViolationCount adv{0, 0, cfg.samples, -std::numeric_limits<double>::infinity()};
  for (std::size_t s = 0; s < cfg.samples; ++s) {
    const Tensor eta = sample_uniform(rng, x.shape(), -eta_star.epsilon, eta_star.epsilon);
    const double h = first_layer_hamiltonian(net, theta0, x + eta, p_split, reg, batch);
    adv.max_gap = std::max(adv.max_gap, h0_star - h);
    if (h < h0_star - cfg.tolerance) ++adv.violations;
  }
  if (cfg.samples == 0) adv.max_gap = 0.0;
  report.adversary = adv;
  return report;
}

nlohmann::json to_json(const PmpReport& report) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : report.per_layer) {
    layers.push_back({{"layer", l.layer},
                      {"violations", l.violations},
                      {"samples", l.samples},
                      {"max_gap", l.max_gap}});
  }
  return {{"per_layer", layers},
          {"adversary",
           {{"violations", report.adversary.violations},
            {"samples", report.adversary.samples},
            {"max_gap", report.adversary.max_gap}}},
          {"tolerance", report.tolerance},
          {"radius", report.radius},
          {"seed", report.seed}};
}

}  // namespace yopo
