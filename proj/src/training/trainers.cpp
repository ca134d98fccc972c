#include <cfloat>
#include <chrono>
#include <stdexcept>
#include <string>

#include "yopo/error.hpp"
#include "yopo/training.hpp"

namespace yopo {
namespace {

constexpr std::uint64_t kAttackStream = 0x61747461636bULL;
constexpr std::uint64_t kEvalStream = 0x6576616cULL;

void require_feasible(const Tensor& eta, double epsilon, const char* where) {
  if (!is_feasible(eta, epsilon)) {
    throw std::logic_error(std::string(where) + ": perturbation left the epsilon ball");
  }
}

void accumulate(std::vector<Tensor>& sum, std::vector<Tensor>&& g) {
  if (sum.empty()) {
    sum = std::move(g);
    return;
  }
  for (std::size_t t = 0; t < sum.size(); ++t) {
    if (!sum[t].empty()) sum[t] += g[t];
  }
}

// Descent gradient of the mean over the batch of a per-example terminal
// gradient g_i, i.e. grad_theta (1/B) sum_i l_i for l_i with grad g_i.
std::vector<Tensor> descent_from_terminal(const Network& net, const Trajectory& traj, Tensor g) {
  const std::size_t batch = traj.output().rows();
  const double b = static_cast<double>(batch);
  for (double& v : g.values()) v = -(v / b);
  const Regularizer none = Regularizer::none();
  const CostateTrajectory co = backward_sweep(net, traj, g, none, batch);
  std::vector<Tensor> grad = hamiltonian_theta_grad(net, traj, co, none, batch);
  for (Tensor& t : grad) t *= -1.0;
  return grad;
}

class Trainer {
 public:
  Trainer(const TrainConfig& cfg, Network& net, PropCounter& counter)
      : cfg_(cfg),
        net_(net),
        loss_{cfg.loss},
        counter_(counter),
        attack_rng_(Rng(cfg.seed).split(kAttackStream)) {}

  void set_lr(double lr) { lr_ = lr; }
  std::uint64_t adversary_updates() const { return adversary_updates_; }

  // Runs one minibatch and returns the loss the weight update was computed from.
  double minibatch(const Tensor& x, const Targets& y) {
    switch (cfg_.method) {
      case Method::natural:
        return natural(x, y);
      case Method::pgd:
        return pgd(x, y);
      case Method::yopo:
      case Method::free:
        return yopo(x, y);
      case Method::trades:
        return trades(x, y);
      case Method::trades_yopo:
        return trades_yopo(x, y);
    }
    throw std::logic_error("unhandled method");
  }

 private:
  void step(const std::vector<Tensor>& grad) {
    sgd_update(net_.params(), grad, lr_, cfg_.momentum, cfg_.weight_decay, sgd_);
  }

  double natural(const Tensor& x, const Targets& y) {
    PhaseTimer timer(&counter_, Phase::weight_update);
    SlackResult pass = compute_slack(net_, loss_, x, y, &counter_);
    step(pass.weight_grad);
    return pass.loss;
  }

  double pgd(const Tensor& x, const Targets& y) {
    const AttackConfig attack = cfg_.attack(cfg_.inner_steps());
    Perturbation eta;
    {
      PhaseTimer timer(&counter_, Phase::attack);
      eta = pgd_attack(net_, loss_, x, y, attack, attack_rng_, &counter_);
    }
    adversary_updates_ += attack.steps;
    require_feasible(eta.eta, cfg_.epsilon, "pgd");
    PhaseTimer timer(&counter_, Phase::weight_update);
    SlackResult pass = compute_slack(net_, loss_, x + eta.eta, y, &counter_);
    step(pass.weight_grad);
    return pass.loss;
  }

  // Fused schedule: the pass at eta^{j,n} gives weight-gradient contribution
  // j and the slack for round j+1; one extra pass at eta^{1,0} seeds round 1.
  // Free-m is the same loop with n = 1.
  double yopo(const Tensor& x, const Targets& y) {
    const std::size_t rounds = cfg_.outer_rounds();
    const AttackConfig inner = cfg_.attack(cfg_.inner_steps());
    Perturbation eta{initial_perturbation(x, cfg_.epsilon, cfg_.init, attack_rng_), cfg_.epsilon};
    SlackVariable slack;
    {
      PhaseTimer timer(&counter_, Phase::attack);
      slack = compute_slack(net_, loss_, x + eta.eta, y, &counter_).slack;
    }
    std::vector<Tensor> update;
    double loss = 0.0;
    for (std::size_t j = 0; j < rounds; ++j) {
      {
        PhaseTimer timer(&counter_, Phase::attack);
        eta = yopo_inner_loop(net_, x, std::move(eta), slack, inner, &counter_);
      }
      adversary_updates_ += inner.steps;
      require_feasible(eta.eta, cfg_.epsilon, "yopo");
      PhaseTimer timer(&counter_, Phase::weight_update);
      SlackResult pass = compute_slack(net_, loss_, x + eta.eta, y, &counter_);
      slack = std::move(pass.slack);
      loss = pass.loss;
      if (cfg_.delayed()) {
        accumulate(update, std::move(pass.weight_grad));
      } else {
        step(pass.weight_grad);
      }
    }
    if (cfg_.delayed()) step(update);
    return loss;
  }

  // Weight pass on l(f(x), y) + KL(f(x) || f(x')) / lambda. The clean forward
  // was already taken to drive the attack; together with the pass at x' it is
  // booked as one full forward and one full backward.
  double trades_weight_pass(const Tensor& x_adv, const Targets& y, const Trajectory& clean) {
    PhaseTimer timer(&counter_, Phase::weight_update);
    const Trajectory adv = forward_sweep(net_, x_adv);
    const double inv_lambda = 1.0 / cfg_.trades_lambda;

    Tensor g_clean = loss_gradients(loss_, clean.output(), y);
    g_clean += inv_lambda * kl_grad_clean(clean.output(), adv.output());
    const Tensor g_adv = inv_lambda * kl_grad_adv(clean.output(), adv.output());

    std::vector<Tensor> grad = descent_from_terminal(net_, clean, std::move(g_clean));
    accumulate(grad, descent_from_terminal(net_, adv, g_adv));
    counter_.add_full_forward();
    counter_.add_full_backward();
    step(grad);
    return mean_loss(loss_, clean.output(), y) +
           inv_lambda * mean_consistency_loss(clean.output(), adv.output());
  }

  double trades(const Tensor& x, const Targets& y) {
    const Trajectory clean = forward_sweep(net_, x);
    const AttackConfig attack = cfg_.attack(cfg_.inner_steps());
    Tensor x_adv;
    {
      PhaseTimer timer(&counter_, Phase::attack);
      x_adv = trades_attack(net_, x, clean.output(), attack, attack_rng_, &counter_);
    }
    adversary_updates_ += attack.steps;
    require_feasible(x_adv - x, cfg_.epsilon + 4 * DBL_EPSILON * (1.0 + max_abs(x.values())),
                     "trades");
    return trades_weight_pass(x_adv, y, clean);
  }

  // Only eta^{m,n} enters the weight update; rounds are not accumulated.
  double trades_yopo(const Tensor& x, const Targets& y) {
    const Trajectory clean = forward_sweep(net_, x);
    const AttackConfig inner = cfg_.attack(cfg_.inner_steps());
    Perturbation eta{initial_perturbation(x, cfg_.epsilon, cfg_.init, attack_rng_), cfg_.epsilon};
    {
      PhaseTimer timer(&counter_, Phase::attack);
      for (std::size_t j = 0; j < cfg_.outer_rounds(); ++j) {
        const SlackVariable slack = consistency_slack(net_, clean.output(), x + eta.eta, &counter_);
        eta = yopo_inner_loop(net_, x, std::move(eta), slack, inner, &counter_);
        adversary_updates_ += inner.steps;
      }
    }
    require_feasible(eta.eta, cfg_.epsilon, "trades_yopo");
    return trades_weight_pass(x + eta.eta, y, clean);
  }

  const TrainConfig& cfg_;
  Network& net_;
  LossFunction loss_;
  PropCounter& counter_;
  Rng attack_rng_;
  SgdState sgd_;
  double lr_ = 0.0;
  std::uint64_t adversary_updates_ = 0;
};

void check_inputs(const TrainConfig& config, const Dataset& data, const Network& net) {
  config.validate();
  check_network(net);
  data.validate();
  if (data.size() == 0) throw ArgumentError("train: empty dataset");
  if (data.dim() != net.input_dim()) {
    throw ShapeError("train: dataset dim " + std::to_string(data.dim()) + " but network input dim " +
                     std::to_string(net.input_dim()));
  }
  if (config.loss == LossKind::softmax_cross_entropy && net.output_dim() < data.classes) {
    throw ShapeError("train: network has fewer outputs than the dataset has classes");
  }
}

}  // namespace

TrainResult train(const TrainConfig& config, const Dataset& data, Network net,
                  const TrainOptions& options) {
  check_inputs(config, data, net);
  const auto start = std::chrono::steady_clock::now();
  const Dataset& eval_data = options.eval_data ? *options.eval_data : data;
  const std::uint64_t eval_seed = splitmix64(config.seed ^ kEvalStream);
  const LossFunction loss{config.loss};

  net.add_seed(config.seed);
  PropCounter counter;
  Trainer trainer(config, net, counter);
  RunReport report;
  report.config = config;
  report.eval_attack = options.eval_attack;

  const Targets targets = data.targets();
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto epoch_start = std::chrono::steady_clock::now();
    trainer.set_lr(config.lr_at(epoch));
    double loss_sum = 0.0;
    for (const auto& idx : batches(data, config.batch_size, config.seed, epoch)) {
      const Tensor x = data.inputs.select_rows(idx);
      const Targets y = targets.select(idx);
      counter.begin_minibatch();
      loss_sum += trainer.minibatch(x, y) * static_cast<double>(idx.size());
      ++report.minibatches;
    }

    EpochMetrics m;
    m.epoch = epoch;
    m.loss = loss_sum / static_cast<double>(data.size());
    m.full_props = counter.totals().full_forward;
    m.first_layer_props = counter.totals().first_layer_forward;
    if (options.eval_each_epoch || epoch + 1 == config.epochs) {
      PhaseTimer timer(&counter, Phase::evaluation);
      const Accuracy acc = evaluate(net, loss, eval_data, options.eval_attack, eval_seed);
      m.clean_acc = acc.clean;
      m.robust_acc = acc.robust;
    }
    if (options.timing) {
      m.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                            epoch_start)
                      .count();
    }
    report.epochs.push_back(m);
  }

  report.counts = counter.totals();
  report.adversary_updates = trainer.adversary_updates();
  report.audit = count_report(counter, config, report.minibatches);
  for (std::size_t p = 0; p < kPhaseCount; ++p) report.phase_ms[p] = counter.wall_ms(static_cast<Phase>(p));
  report.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return {std::move(net), std::move(report)};
}

}  // namespace yopo
