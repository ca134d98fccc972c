#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "yopo/dynamics.hpp"
#include "yopo/hamiltonian.hpp"
#include "yopo/loss.hpp"
#include "yopo/rng.hpp"

namespace yopo {

class PropCounter;

// Batched l_inf perturbation; every row satisfies ||eta_i||_inf <= epsilon
// whenever it leaves an attack routine.
struct Perturbation {
  Tensor eta;
  double epsilon = 0.0;
};

// Loss gradient at the f_0 output, frozen during the cheap adversary steps.
// Equals -B * p_{k0} for the co-state at the f_0/g boundary.
struct SlackVariable {
  Tensor p;
};

enum class Direction { raw_gradient, sign };
enum class Init { zero, uniform };

std::string_view direction_name(Direction d) noexcept;
Direction parse_direction(std::string_view name);
std::string_view init_name(Init i) noexcept;
Init parse_init(std::string_view name);

struct AttackConfig {
  std::size_t steps = 20;
  double step_size = 0.01;
  double epsilon = 0.3;
  Direction direction = Direction::sign;
  Init init = Init::uniform;
  // When false, projection happens once, after the last step.
  bool project_each_step = true;

  void validate() const;
};

// Elementwise clamp to [-epsilon, epsilon].
Tensor linf_project(const Tensor& eta, double epsilon);
void linf_project_inplace(Tensor& eta, double epsilon);
bool is_feasible(const Tensor& eta, double epsilon) noexcept;

Tensor initial_perturbation(const Tensor& x, double epsilon, Init init, Rng& rng);

// eta <- eta + step * dir(g), in place.
void ascent_step(Tensor& eta, const Tensor& g, double step, Direction direction);

// Per-example input gradients grad_x l_i (unscaled), via a forward sweep and
// the co-state sweep: grad_x l_i = -B p_{i,0}. One full forward and backward.
Tensor input_gradient(const Network& net, const LossFunction& loss, const Tensor& x,
                      const Targets& y, PropCounter* counter = nullptr);

// PGD-r on the data loss: r full propagations.
Perturbation pgd_attack(const Network& net, const LossFunction& loss, const Tensor& x,
                        const Targets& y, const AttackConfig& cfg, Rng& rng,
                        PropCounter* counter = nullptr);

// One full propagation at x_plus_eta. Besides the slack variable it returns
// what the same pass gives for free: the descent gradient of the mean loss
// per layer (no regularizer) and the mean loss.
struct SlackResult {
  SlackVariable slack;
  std::vector<Tensor> weight_grad;
  double loss = 0.0;
};

SlackResult compute_slack(const Network& net, const LossFunction& loss, const Tensor& x_plus_eta,
                          const Targets& y, PropCounter* counter = nullptr);

// n = cfg.steps iterations of eta <- Pi(eta + alpha1 * dir(p . grad_eta f_0(x + eta))),
// each costing one first-layer forward and backward only.
Perturbation yopo_inner_loop(const Network& net, const Tensor& x, Perturbation eta,
                             const SlackVariable& slack, const AttackConfig& cfg,
                             PropCounter* counter = nullptr);

// TRADES consistency attack: cfg.steps sign steps ascending
// KL(softmax f(x) || softmax f(x')), projected onto the eps-ball around x.
// `clean_logits` is f(x) for the batch. Returns x'.
Tensor trades_attack(const Network& net, const Tensor& x, const Tensor& clean_logits,
                     const AttackConfig& cfg, Rng& rng, PropCounter* counter = nullptr);

// Mean over the batch of KL(softmax(clean_i) || softmax(adv_i)).
double mean_consistency_loss(const Tensor& clean_logits, const Tensor& adv_logits);

// Per-example gradient of KL(softmax(clean) || softmax(adv)) with respect to
// the adversarial logits (softmax(adv) - softmax(clean)) and the clean logits.
Tensor kl_grad_adv(const Tensor& clean_logits, const Tensor& adv_logits);
Tensor kl_grad_clean(const Tensor& clean_logits, const Tensor& adv_logits);

// Slack variable of the consistency loss at x_plus_eta: one full propagation.
SlackVariable consistency_slack(const Network& net, const Tensor& clean_logits,
                                const Tensor& x_plus_eta, PropCounter* counter = nullptr);

}  // namespace yopo
