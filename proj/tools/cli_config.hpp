#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "yopo/data.hpp"
#include "yopo/dynamics.hpp"
#include "yopo/training.hpp"

namespace yopo::cli {

// Config file schema (JSON). Top-level keys are TrainConfig fields plus:
//   "network": {"dims": [d0, ..., dL], "activation": "tanh", "first_layer_len": 2}
//              dims may be omitted; then [d_data, 32, 32, classes].
//   "data":    {"kind": "two_gaussians" | "two_moons", "dim", "examples", "margin",
//               "noise", "seed", "test_examples"}     test set drawn with seed + 1
//           or {"kind": "idx", "train_images", "train_labels", "test_images", "test_labels"}
//   "eval":    {"attack": "pgd" | "none", "steps", "step_size", "epsilon", ...}

struct NetworkSpec {
  std::vector<std::size_t> dims;
  Activation activation = Activation::tanh;
  std::size_t first_layer_len = 2;
};

struct DataSpec {
  bool idx = false;
  SyntheticSpec synthetic;
  bool synthetic_seed_set = false;
  std::size_t test_examples = 0;
  std::string train_images, train_labels, test_images, test_labels;
};

struct CliConfig {
  TrainConfig train;
  NetworkSpec network;
  DataSpec data;
  // "eval" without its "attack" key; resolved against the final epsilon.
  bool eval_attack = true;
  nlohmann::json eval_fields = nlohmann::json::object();
};

CliConfig cli_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CliConfig& config);

// Clears m / n / r / delayed_update the new method does not use, so a config
// written for one method can be rerun with another from the command line.
void switch_method(TrainConfig& config, Method method);

struct LoadedData {
  Dataset train;
  std::optional<Dataset> test;

  const Dataset& eval_set() const { return test ? *test : train; }
};

LoadedData load_data(const CliConfig& config);

// Fills in network dims from the data when they were omitted and checks them.
void resolve_network(CliConfig& config, const Dataset& data);
Network build_network(const CliConfig& config);

// The eval attack, with epsilon defaulting to the training epsilon.
std::optional<AttackConfig> resolved_eval(const CliConfig& config);

}  // namespace yopo::cli
