#include "cli_config.hpp"

#include <set>

#include "yopo/error.hpp"
#include "yopo/rng.hpp"

namespace yopo::cli {
namespace {

using nlohmann::json;

constexpr std::uint64_t kInitStream = 0x6e6574;

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& prefix) {
  if (!j.is_object()) throw ConfigError(prefix, "expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError(prefix + "." + key, "unknown field");
  }
}

template <typename T>
T get(const json& j, const char* key, const std::string& prefix) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(prefix + "." + key, std::string("bad value: ") + e.what());
  }
}

NetworkSpec network_from_json(const json& j) {
  reject_unknown(j, {"dims", "activation", "first_layer_len"}, "network");
  NetworkSpec s;
  if (j.contains("dims")) s.dims = get<std::vector<std::size_t>>(j, "dims", "network");
  if (j.contains("activation")) {
    try {
      s.activation = parse_activation(get<std::string>(j, "activation", "network"));
    } catch (const ArgumentError& e) {
      throw ConfigError("network.activation", e.what());
    }
  }
  if (j.contains("first_layer_len")) s.first_layer_len = get<std::size_t>(j, "first_layer_len", "network");
  return s;
}

DataSpec data_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("data", "expected a JSON object");
  DataSpec s;
  const std::string kind = j.contains("kind") ? get<std::string>(j, "kind", "data") : "two_gaussians";
  if (kind == "idx") {
    reject_unknown(j, {"kind", "train_images", "train_labels", "test_images", "test_labels"}, "data");
    s.idx = true;
    s.train_images = get<std::string>(j, "train_images", "data");
    s.train_labels = get<std::string>(j, "train_labels", "data");
    if (j.contains("test_images") != j.contains("test_labels")) {
      throw ConfigError("data.test_images", "test_images and test_labels go together");
    }
    if (j.contains("test_images")) {
      s.test_images = get<std::string>(j, "test_images", "data");
      s.test_labels = get<std::string>(j, "test_labels", "data");
    }
    return s;
  }
  reject_unknown(j, {"kind", "dim", "examples", "margin", "noise", "seed", "test_examples"}, "data");
  try {
    s.synthetic.kind = parse_synthetic(kind);
  } catch (const ArgumentError& e) {
    throw ConfigError("data.kind", e.what());
  }
  if (j.contains("dim")) s.synthetic.dim = get<std::size_t>(j, "dim", "data");
  if (j.contains("examples")) s.synthetic.examples = get<std::size_t>(j, "examples", "data");
  if (j.contains("margin")) s.synthetic.margin = get<double>(j, "margin", "data");
  if (j.contains("noise")) s.synthetic.noise = get<double>(j, "noise", "data");
  if (j.contains("seed")) {
    s.synthetic.seed = get<std::uint64_t>(j, "seed", "data");
    s.synthetic_seed_set = true;
  }
  if (j.contains("test_examples")) s.test_examples = get<std::size_t>(j, "test_examples", "data");
  return s;
}

SyntheticSpec effective_synthetic(const CliConfig& c) {
  SyntheticSpec s = c.data.synthetic;
  if (!c.data.synthetic_seed_set) s.seed = c.train.seed;
  return s;
}

}  // namespace

CliConfig cli_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
  CliConfig c;
  json train = j;
  if (j.contains("network")) {
    c.network = network_from_json(j.at("network"));
    train.erase("network");
  }
  if (j.contains("data")) {
    c.data = data_from_json(j.at("data"));
    train.erase("data");
  }
  if (j.contains("eval")) {
    json e = j.at("eval");
    if (!e.is_object()) throw ConfigError("eval", "expected a JSON object");
    if (e.contains("attack")) {
      const std::string a = get<std::string>(e, "attack", "eval");
      if (a != "pgd" && a != "none") throw ConfigError("eval.attack", "expected pgd or none");
      c.eval_attack = a == "pgd";
      e.erase("attack");
    }
    c.eval_fields = e;
    train.erase("eval");
  }
  c.train = train_config_from_json(train);
  if (c.eval_attack) resolved_eval(c);  // report bad eval fields early
  return c;
}

json to_json(const CliConfig& c) {
  json j = to_json(c.train);
  json net = {{"activation", activation_name(c.network.activation)},
              {"first_layer_len", c.network.first_layer_len}};
  if (!c.network.dims.empty()) net["dims"] = c.network.dims;
  j["network"] = net;
  if (c.data.idx) {
    json d = {{"kind", "idx"}, {"train_images", c.data.train_images}, {"train_labels", c.data.train_labels}};
    if (!c.data.test_images.empty()) {
      d["test_images"] = c.data.test_images;
      d["test_labels"] = c.data.test_labels;
    }
    j["data"] = d;
  } else {
    const SyntheticSpec s = effective_synthetic(c);
    j["data"] = {{"kind", synthetic_name(s.kind)}, {"dim", s.dim},     {"examples", s.examples},
                 {"margin", s.margin},              {"noise", s.noise}, {"seed", s.seed},
                 {"test_examples", c.data.test_examples}};
  }
  if (const auto a = resolved_eval(c)) {
    json e = to_json(*a);
    e["attack"] = "pgd";
    j["eval"] = e;
  } else {
    j["eval"] = {{"attack", "none"}};
  }
  return j;
}

void switch_method(TrainConfig& config, Method method) {
  config.method = method;
  const bool m = method == Method::yopo || method == Method::free || method == Method::trades_yopo;
  const bool n = method == Method::yopo || method == Method::trades_yopo;
  const bool r = method == Method::pgd || method == Method::trades;
  if (!m) config.m.reset();
  if (!n) config.n.reset();
  if (!r) config.r.reset();
  if (method != Method::yopo && method != Method::free) config.delayed_update.reset();
}

LoadedData load_data(const CliConfig& c) {
  LoadedData out;
  if (c.data.idx) {
    out.train = load_idx_dataset(c.data.train_images, c.data.train_labels);
    if (!c.data.test_images.empty()) out.test = load_idx_dataset(c.data.test_images, c.data.test_labels);
    return out;
  }
  SyntheticSpec s = effective_synthetic(c);
  try {
    out.train = gen_synthetic(s);
    if (c.data.test_examples > 0) {
      s.examples = c.data.test_examples;
      s.seed += 1;
      out.test = gen_synthetic(s);
    }
  } catch (const ArgumentError& e) {
    throw ConfigError("data", e.what());
  }
  return out;
}

void resolve_network(CliConfig& c, const Dataset& data) {
  auto& dims = c.network.dims;
  if (dims.empty()) dims = {data.dim(), 32, 32, data.classes};
  if (dims.size() < 2) throw ConfigError("network.dims", "need at least input and output sizes");
  for (std::size_t d : dims) {
    if (d == 0) throw ConfigError("network.dims", "sizes must be positive");
  }
  if (dims.front() != data.dim()) {
    throw ConfigError("network.dims", "first entry " + std::to_string(dims.front()) +
                                          " does not match data dim " + std::to_string(data.dim()));
  }
  if (c.train.loss == LossKind::softmax_cross_entropy && dims.back() < data.classes) {
    throw ConfigError("network.dims", "fewer outputs than classes");
  }
  if (c.network.first_layer_len < 1) throw ConfigError("network.first_layer_len", "must be at least 1");
}

Network build_network(const CliConfig& c) {
  Rng rng = Rng(c.train.seed).split(kInitStream);
  return make_mlp(c.network.dims, c.network.activation, rng, c.network.first_layer_len);
}

std::optional<AttackConfig> resolved_eval(const CliConfig& c) {
  if (!c.eval_attack) return std::nullopt;
  json e = c.eval_fields;
  if (!e.contains("epsilon")) e["epsilon"] = c.train.epsilon;
  try {
    return attack_config_from_json(e);
  } catch (const ConfigError& err) {
    throw ConfigError("eval", err.what());
  }
}

}  // namespace yopo::cli
