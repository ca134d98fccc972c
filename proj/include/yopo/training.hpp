#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "yopo/adversary.hpp"
#include "yopo/data.hpp"
#include "yopo/dynamics.hpp"
#include "yopo/instrumentation.hpp"
#include "yopo/loss.hpp"

namespace yopo {

enum class Method { natural, pgd, yopo, free, trades, trades_yopo };

std::string_view method_name(Method m) noexcept;
Method parse_method(std::string_view name);

// From `epoch` on (0-based) the learning rate is multiplied by `multiplier`.
struct LrStep {
  std::size_t epoch = 0;
  double multiplier = 1.0;

  friend bool operator==(const LrStep&, const LrStep&) = default;
};

struct TrainConfig {
  Method method = Method::natural;
  // m, n for yopo / trades_yopo, m for free, r for pgd / trades. Setting one
  // the method does not use is a config error.
  std::optional<std::size_t> m;
  std::optional<std::size_t> n;
  std::optional<std::size_t> r;

  double attack_step = 0.01;  // alpha1
  double lr = 0.1;            // alpha2
  std::vector<LrStep> lr_schedule;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::size_t batch_size = 256;
  std::size_t epochs = 1;
  double epsilon = 0.3;
  double trades_lambda = 1.0;
  std::uint64_t seed = 0;
  // Apply the accumulated weight update once per minibatch (true) or after
  // every outer round j (false). Defaults: yopo true, free false.
  std::optional<bool> delayed_update;

  Direction direction = Direction::sign;
  Init init = Init::uniform;
  bool project_each_step = true;
  LossKind loss = LossKind::softmax_cross_entropy;

  // Throws ConfigError naming the offending field.
  void validate() const;

  double lr_at(std::size_t epoch) const;
  bool delayed() const;
  std::size_t outer_rounds() const;  // m (1 for natural, pgd, trades)
  std::size_t inner_steps() const;   // n for yopo/trades_yopo, 1 for free, r for pgd/trades, 0 for natural
  AttackConfig attack(std::size_t steps) const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

nlohmann::json to_json(const TrainConfig& config);
// Missing fields keep their defaults; unknown fields are rejected.
TrainConfig train_config_from_json(const nlohmann::json& j);

// Momentum SGD with coupled weight decay:
//   v <- momentum * v + grad + weight_decay * theta;  theta <- theta - lr * v.
void sgd_update(Tensor& theta, const Tensor& grad, double lr, double momentum, double weight_decay,
                Tensor& velocity);

struct SgdState {
  std::vector<Tensor> velocity;
};

// Layerwise; parameter-free layers (empty tensors) are skipped.
void sgd_update(std::vector<Tensor>& theta, const std::vector<Tensor>& grad, double lr,
                double momentum, double weight_decay, SgdState& state);

struct Accuracy {
  double clean = 0.0;
  double robust = 0.0;
};

// Clean accuracy and accuracy under `attack`. An example counts as robust
// only when it is classified correctly both clean and attacked, so
// robust <= clean. No attack gives robust == clean.
Accuracy evaluate(const Network& net, const LossFunction& loss, const Dataset& data,
                  const std::optional<AttackConfig>& attack, std::uint64_t seed,
                  std::size_t batch_size = 256);

// PGD-20 with sign steps of epsilon / 4 and a uniform start.
AttackConfig default_eval_attack(double epsilon);

struct EpochMetrics {
  std::size_t epoch = 0;
  double clean_acc = 0.0;
  double robust_acc = 0.0;
  double loss = 0.0;
  std::uint64_t full_props = 0;  // cumulative
  std::uint64_t first_layer_props = 0;
  double wall_ms = 0.0;
};

struct RunReport {
  TrainConfig config;
  std::vector<EpochMetrics> epochs;
  PropCounts counts;
  std::uint64_t minibatches = 0;
  std::uint64_t adversary_updates = 0;
  CountAudit audit;
  std::optional<AttackConfig> eval_attack;
  std::array<double, kPhaseCount> phase_ms{};
  double wall_ms = 0.0;
};

struct TrainOptions {
  // Per-epoch accuracies are measured here; the training set when null.
  const Dataset* eval_data = nullptr;
  std::optional<AttackConfig> eval_attack;
  bool eval_each_epoch = true;
  // Record wall times in EpochMetrics. Off by default so reruns are byte-identical.
  bool timing = false;
};

struct TrainResult {
  Network network;
  RunReport report;
};

TrainResult train(const TrainConfig& config, const Dataset& data, Network net,
                  const TrainOptions& options = {});

nlohmann::json to_json(const AttackConfig& cfg);
AttackConfig attack_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CountAudit& audit);
nlohmann::json to_json(const PropCounts& counts);
// Timing lives under "timing"; every other field is deterministic.
nlohmann::json to_json(const RunReport& report);

// Header: epoch,clean_acc,robust_acc,loss,full_props,first_layer_props,wall_ms
// preceded by one "# config: {...}" line echoing `config`, or the
// TrainConfig when `config` is null.
void write_metrics_csv(std::ostream& out, const RunReport& report,
                       const nlohmann::json& config = nullptr);

}  // namespace yopo
