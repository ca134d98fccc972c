#include <cmath>
#include <set>
#include <string>

#include "yopo/error.hpp"
#include "yopo/training.hpp"

namespace yopo {
namespace {

using nlohmann::json;

bool uses_m(Method m) { return m == Method::yopo || m == Method::free || m == Method::trades_yopo; }
bool uses_n(Method m) { return m == Method::yopo || m == Method::trades_yopo; }
bool uses_r(Method m) { return m == Method::pgd || m == Method::trades; }

void check_count(const std::optional<std::size_t>& v, bool used, Method method, const char* field) {
  if (used && !v) {
    throw ConfigError(field, "required for method " + std::string(method_name(method)));
  }
  if (!used && v) {
    throw ConfigError(field, "not used by method " + std::string(method_name(method)));
  }
  if (v && *v < 1) throw ConfigError(field, "must be at least 1");
}

void check_finite(double v, const char* field) {
  if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
}

template <typename T>
T get(const json& j, const char* field) {
  try {
    return j.at(field).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(field, std::string("bad value: ") + e.what());
  }
}

template <typename Parse>
auto parse_named(const json& j, const char* field, Parse parse) {
  const auto name = get<std::string>(j, field);
  try {
    return parse(name);
  } catch (const ArgumentError& e) {
    throw ConfigError(field, e.what());
  }
}

}  // namespace

std::string_view method_name(Method m) noexcept {
  switch (m) {
    case Method::natural:
      return "natural";
    case Method::pgd:
      return "pgd";
    case Method::yopo:
      return "yopo";
    case Method::free:
      return "free";
    case Method::trades:
      return "trades";
    case Method::trades_yopo:
      return "trades_yopo";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::natural, Method::pgd, Method::yopo, Method::free, Method::trades,
                   Method::trades_yopo}) {
    if (name == method_name(m)) return m;
  }
  throw ArgumentError("unknown method '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  check_count(m, uses_m(method), method, "m");
  check_count(n, uses_n(method), method, "n");
  check_count(r, uses_r(method), method, "r");
  if (delayed_update && method != Method::yopo && method != Method::free) {
    throw ConfigError("delayed_update", "only meaningful for yopo and free");
  }
  for (auto [v, field] : {std::pair{attack_step, "attack_step"}, std::pair{lr, "lr"},
                          std::pair{momentum, "momentum"}, std::pair{weight_decay, "weight_decay"},
                          std::pair{epsilon, "epsilon"}, std::pair{trades_lambda, "trades_lambda"}}) {
    check_finite(v, field);
  }
  if (attack_step < 0.0) throw ConfigError("attack_step", "must be non-negative");
  if (lr < 0.0) throw ConfigError("lr", "must be non-negative");
  if (momentum < 0.0) throw ConfigError("momentum", "must be non-negative");
  if (weight_decay < 0.0) throw ConfigError("weight_decay", "must be non-negative");
  if (epsilon < 0.0) throw ConfigError("epsilon", "must be non-negative");
  if (!(trades_lambda > 0.0)) throw ConfigError("trades_lambda", "must be positive");
  if (batch_size < 1) throw ConfigError("batch_size", "must be at least 1");
  for (std::size_t i = 0; i < lr_schedule.size(); ++i) {
    if (i > 0 && lr_schedule[i].epoch <= lr_schedule[i - 1].epoch) {
      throw ConfigError("lr_schedule", "epochs must be strictly increasing");
    }
    if (!std::isfinite(lr_schedule[i].multiplier) || lr_schedule[i].multiplier < 0.0) {
      throw ConfigError("lr_schedule", "multipliers must be finite and non-negative");
    }
  }
  if ((method == Method::trades || method == Method::trades_yopo) && direction != Direction::sign) {
    throw ConfigError("direction", "the consistency attack uses sign steps");
  }
}

double TrainConfig::lr_at(std::size_t epoch) const {
  double rate = lr;
  for (const LrStep& s : lr_schedule) {
    if (s.epoch <= epoch) rate *= s.multiplier;
  }
  return rate;
}

bool TrainConfig::delayed() const {
  if (delayed_update) return *delayed_update;
  return method != Method::free;
}

std::size_t TrainConfig::outer_rounds() const { return uses_m(method) ? m.value_or(1) : 1; }

std::size_t TrainConfig::inner_steps() const {
  switch (method) {
    case Method::natural:
      return 0;
    case Method::pgd:
    case Method::trades:
      return r.value_or(1);
    case Method::free:
      return 1;
    case Method::yopo:
    case Method::trades_yopo:
      return n.value_or(1);
  }
  return 0;
}

AttackConfig TrainConfig::attack(std::size_t steps) const {
  AttackConfig a;
  a.steps = steps;
  a.step_size = attack_step;
  a.epsilon = epsilon;
  a.direction = direction;
  a.init = init;
  a.project_each_step = project_each_step;
  return a;
}

json to_json(const TrainConfig& c) {
  json j = {{"method", method_name(c.method)},
            {"attack_step", c.attack_step},
            {"lr", c.lr},
            {"momentum", c.momentum},
            {"weight_decay", c.weight_decay},
            {"batch_size", c.batch_size},
            {"epochs", c.epochs},
            {"epsilon", c.epsilon},
            {"trades_lambda", c.trades_lambda},
            {"seed", c.seed},
            {"direction", direction_name(c.direction)},
            {"init", init_name(c.init)},
            {"project_each_step", c.project_each_step},
            {"loss", loss_name(c.loss)}};
  if (c.m) j["m"] = *c.m;
  if (c.n) j["n"] = *c.n;
  if (c.r) j["r"] = *c.r;
  if (c.method == Method::yopo || c.method == Method::free) j["delayed_update"] = c.delayed();
  json schedule = json::array();
  for (const LrStep& s : c.lr_schedule) schedule.push_back({{"epoch", s.epoch}, {"multiplier", s.multiplier}});
  j["lr_schedule"] = schedule;
  return j;
}

TrainConfig train_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
  static const std::set<std::string> known = {
      "method", "m", "n", "r", "attack_step", "lr", "lr_schedule", "momentum", "weight_decay",
      "batch_size", "epochs", "epsilon", "trades_lambda", "seed", "delayed_update", "direction",
      "init", "project_each_step", "loss"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError(key, "unknown field");
  }

  TrainConfig c;
  if (j.contains("method")) c.method = parse_named(j, "method", parse_method);
  if (j.contains("m")) c.m = get<std::size_t>(j, "m");
  if (j.contains("n")) c.n = get<std::size_t>(j, "n");
  if (j.contains("r")) c.r = get<std::size_t>(j, "r");
  if (j.contains("attack_step")) c.attack_step = get<double>(j, "attack_step");
  if (j.contains("lr")) c.lr = get<double>(j, "lr");
  if (j.contains("momentum")) c.momentum = get<double>(j, "momentum");
  if (j.contains("weight_decay")) c.weight_decay = get<double>(j, "weight_decay");
  if (j.contains("batch_size")) c.batch_size = get<std::size_t>(j, "batch_size");
  if (j.contains("epochs")) c.epochs = get<std::size_t>(j, "epochs");
  if (j.contains("epsilon")) c.epsilon = get<double>(j, "epsilon");
  if (j.contains("trades_lambda")) c.trades_lambda = get<double>(j, "trades_lambda");
  if (j.contains("seed")) c.seed = get<std::uint64_t>(j, "seed");
  if (j.contains("delayed_update")) c.delayed_update = get<bool>(j, "delayed_update");
  if (j.contains("direction")) c.direction = parse_named(j, "direction", parse_direction);
  if (j.contains("init")) c.init = parse_named(j, "init", parse_init);
  if (j.contains("project_each_step")) c.project_each_step = get<bool>(j, "project_each_step");
  if (j.contains("loss")) c.loss = parse_named(j, "loss", parse_loss);
  if (j.contains("lr_schedule")) {
    const json& s = j.at("lr_schedule");
    if (!s.is_array()) throw ConfigError("lr_schedule", "expected an array");
    for (const json& step : s) {
      try {
        c.lr_schedule.push_back({step.at("epoch").get<std::size_t>(), step.at("multiplier").get<double>()});
      } catch (const json::exception& e) {
        throw ConfigError("lr_schedule", std::string("bad entry: ") + e.what());
      }
    }
  }
  return c;
}

}  // namespace yopo
