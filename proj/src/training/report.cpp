#include <iomanip>
#include <set>

#include "yopo/error.hpp"
#include "yopo/training.hpp"

namespace yopo {

using nlohmann::json;

json to_json(const AttackConfig& cfg) {
  return {{"steps", cfg.steps},
          {"step_size", cfg.step_size},
          {"epsilon", cfg.epsilon},
          {"direction", direction_name(cfg.direction)},
          {"init", init_name(cfg.init)},
          {"project_each_step", cfg.project_each_step}};
}

AttackConfig attack_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("attack", "expected a JSON object");
  static const std::set<std::string> known = {"steps", "step_size", "epsilon", "direction", "init",
                                              "project_each_step"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("attack." + key, "unknown field");
  }
  AttackConfig a;
  try {
    if (j.contains("epsilon")) a.epsilon = j.at("epsilon").get<double>();
    a.step_size = a.epsilon / 4.0;
    if (j.contains("steps")) a.steps = j.at("steps").get<std::size_t>();
    if (j.contains("step_size")) a.step_size = j.at("step_size").get<double>();
    if (j.contains("direction")) a.direction = parse_direction(j.at("direction").get<std::string>());
    if (j.contains("init")) a.init = parse_init(j.at("init").get<std::string>());
    if (j.contains("project_each_step")) a.project_each_step = j.at("project_each_step").get<bool>();
    a.validate();
  } catch (const json::exception& e) {
    throw ConfigError("attack", e.what());
  } catch (const ArgumentError& e) {
    throw ConfigError("attack", e.what());
  }
  return a;
}

json to_json(const PropCounts& c) {
  return {{"full_forward", c.full_forward},
          {"full_backward", c.full_backward},
          {"first_layer_forward", c.first_layer_forward},
          {"first_layer_backward", c.first_layer_backward}};
}

json to_json(const CountAudit& audit) {
  json cats = json::array();
  for (const auto& c : audit.categories) {
    cats.push_back({{"category", c.category},
                    {"expected", c.expected},
                    {"observed", c.observed},
                    {"pass", c.pass}});
  }
  return {{"pass", audit.pass()}, {"categories", cats}};
}

json to_json(const RunReport& report) {
  json epochs = json::array();
  for (const EpochMetrics& m : report.epochs) {
    epochs.push_back({{"epoch", m.epoch},
                      {"clean_acc", m.clean_acc},
                      {"robust_acc", m.robust_acc},
                      {"loss", m.loss},
                      {"full_props", m.full_props},
                      {"first_layer_props", m.first_layer_props}});
  }
  json timing = {{"wall_ms", report.wall_ms}};
  for (std::size_t p = 0; p < kPhaseCount; ++p) {
    timing[std::string(phase_name(static_cast<Phase>(p))) + "_ms"] = report.phase_ms[p];
  }
  json epoch_ms = json::array();
  for (const EpochMetrics& m : report.epochs) epoch_ms.push_back(m.wall_ms);
  timing["epoch_ms"] = epoch_ms;

  return {{"config", to_json(report.config)},
          {"seed", report.config.seed},
          {"eval_attack", report.eval_attack ? to_json(*report.eval_attack) : json(nullptr)},
          {"epochs", epochs},
          {"minibatches", report.minibatches},
          {"adversary_updates", report.adversary_updates},
          {"counts", to_json(report.counts)},
          {"audit", to_json(report.audit)},
          {"timing", timing}};
}

void write_metrics_csv(std::ostream& out, const RunReport& report, const json& config) {
  out << "# config: " << (config.is_null() ? to_json(report.config) : config).dump() << '\n';
  out << "epoch,clean_acc,robust_acc,loss,full_props,first_layer_props,wall_ms\n";
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(17);
  for (const EpochMetrics& m : report.epochs) {
    out << m.epoch << ',' << m.clean_acc << ',' << m.robust_acc << ',' << m.loss << ','
        << m.full_props << ',' << m.first_layer_props << ',' << m.wall_ms << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace yopo
