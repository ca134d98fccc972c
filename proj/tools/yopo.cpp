// yopo: command-line driver for training, attacking, evaluating and auditing.
//
// Exit codes: 0 success, 1 config or runtime error, 2 usage error.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "cli_config.hpp"
#include "json.hpp"
#include "yopo/checkpoint.hpp"
#include "yopo/error.hpp"
#include "yopo/pmp.hpp"
#include "yopo/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace yopo;
using namespace yopo::cli;

namespace {

// Overrides shared by train and bench; unset flags leave the config alone.
struct TrainFlags {
  std::optional<std::string> method;
  std::optional<std::size_t> m, n, r, epochs, batch_size;
  std::optional<std::uint64_t> seed;
  std::optional<double> lr, epsilon, attack_step, momentum, weight_decay, trades_lambda;
  std::optional<bool> delayed_update;

  void add(CLI::App* app, bool with_method) {
    if (with_method) app->add_option("--method", method, "natural|pgd|yopo|free|trades|trades_yopo");
    app->add_option("--m", m, "outer rounds (yopo, free, trades_yopo)");
    app->add_option("--n", n, "inner first-layer steps (yopo, trades_yopo)");
    app->add_option("--r", r, "attack steps (pgd, trades)");
    app->add_option("--seed", seed);
    app->add_option("--epochs", epochs);
    app->add_option("--batch-size", batch_size);
    app->add_option("--lr", lr);
    app->add_option("--epsilon", epsilon);
    app->add_option("--attack-step", attack_step);
    app->add_option("--momentum", momentum);
    app->add_option("--weight-decay", weight_decay);
    app->add_option("--trades-lambda", trades_lambda);
    app->add_option("--delayed-update", delayed_update);
  }

  void apply(TrainConfig& c) const {
    if (method) {
      try {
        const Method next = parse_method(*method);
        if (next != c.method) switch_method(c, next);
      } catch (const ArgumentError& e) {
        throw ConfigError("method", e.what());
      }
    }
    if (m) c.m = *m;
    if (n) c.n = *n;
    if (r) c.r = *r;
    if (seed) c.seed = *seed;
    if (epochs) c.epochs = *epochs;
    if (batch_size) c.batch_size = *batch_size;
    if (lr) c.lr = *lr;
    if (epsilon) c.epsilon = *epsilon;
    if (attack_step) c.attack_step = *attack_step;
    if (momentum) c.momentum = *momentum;
    if (weight_decay) c.weight_decay = *weight_decay;
    if (trades_lambda) c.trades_lambda = *trades_lambda;
    if (delayed_update) c.delayed_update = *delayed_update;
  }
};

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

fs::path default_out_dir() {
  const char* env = std::getenv("YOPO_OUT_DIR");
  return env && *env ? fs::path(env) : fs::path(".");
}

// The config for commands working on a trained network: --config when
// given, otherwise the config recorded in the checkpoint.
CliConfig config_for(const std::string& config_path, const Checkpoint& ckpt) {
  if (!config_path.empty()) return cli_config_from_json(read_json(config_path));
  if (ckpt.metadata.contains("config")) return cli_config_from_json(ckpt.metadata.at("config"));
  throw ConfigError("config", "no --config given and the checkpoint records none");
}

int cmd_train(const std::string& config_path, const TrainFlags& flags, const fs::path& out_dir,
              bool timing) {
  CliConfig c = config_path.empty() ? CliConfig{} : cli_config_from_json(read_json(config_path));
  flags.apply(c.train);
  c.train.validate();
  const LoadedData data = load_data(c);
  resolve_network(c, data.train);
  const json echo = to_json(c);

  TrainOptions options;
  options.eval_data = data.test ? &*data.test : nullptr;
  options.eval_attack = resolved_eval(c);
  options.timing = timing;
  TrainResult result = train(c.train, data.train, build_network(c), options);

  json report = to_json(result.report);
  if (!timing) report.erase("timing");
  report["resolved_config"] = echo;
  fs::create_directories(out_dir);
  write_json(out_dir / "report.json", report);
  std::ostringstream csv;
  write_metrics_csv(csv, result.report, echo);
  write_text(out_dir / "metrics.csv", csv.str());
  save_checkpoint(out_dir / "checkpoint.json", {result.network, {{"config", echo}}});

  const EpochMetrics& last = result.report.epochs.back();
  std::cout << method_name(c.train.method) << ": clean " << last.clean_acc << " robust "
            << last.robust_acc << " full props " << result.report.counts.full_forward
            << " audit " << (result.report.audit.pass() ? "pass" : "FAIL") << "\n";
  return result.report.audit.pass() ? 0 : 1;
}

std::optional<AttackConfig> attack_from_flags(const CliConfig& c, const std::string& kind,
                                              std::optional<std::size_t> steps,
                                              std::optional<double> step_size,
                                              std::optional<double> epsilon) {
  if (kind == "none") return std::nullopt;
  if (kind != "pgd") throw ConfigError("attack", "expected pgd or none");
  CliConfig copy = c;
  copy.eval_attack = true;
  if (epsilon) copy.eval_fields["epsilon"] = *epsilon;
  if (steps) copy.eval_fields["steps"] = *steps;
  if (step_size) copy.eval_fields["step_size"] = *step_size;
  return resolved_eval(copy);
}

int cmd_eval(const fs::path& ckpt_path, const std::string& config_path, const std::string& kind,
             std::optional<std::size_t> steps, std::optional<double> step_size,
             std::optional<double> epsilon, const fs::path& out) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const CliConfig c = config_for(config_path, ckpt);
  const LoadedData data = load_data(c);
  const auto attack = attack_from_flags(c, kind, steps, step_size, epsilon);
  const Accuracy acc = evaluate(ckpt.network, LossFunction{c.train.loss}, data.eval_set(), attack,
                                splitmix64(c.train.seed));
  json j = {{"clean_acc", acc.clean},
            {"robust_acc", acc.robust},
            {"examples", data.eval_set().size()},
            {"attack", attack ? to_json(*attack) : json("none")},
            {"checkpoint", ckpt_path.string()},
            {"resolved_config", to_json(c)}};
  write_json(out, j);
  std::cout << "clean " << acc.clean << " robust " << acc.robust << "\n";
  return 0;
}

int cmd_attack(const fs::path& ckpt_path, const std::string& config_path,
               std::optional<std::size_t> steps, std::optional<double> step_size,
               std::optional<double> epsilon, const fs::path& out_dir) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const CliConfig c = config_for(config_path, ckpt);
  const LoadedData data = load_data(c);
  const Dataset& ds = data.eval_set();
  const AttackConfig attack = *attack_from_flags(c, "pgd", steps, step_size, epsilon);
  const LossFunction loss{c.train.loss};
  Rng rng(splitmix64(c.train.seed));
  const Perturbation eta = pgd_attack(ckpt.network, loss, ds.inputs, ds.targets(), attack, rng);

  const Tensor clean = forward_sweep(ckpt.network, ds.inputs).output();
  const Tensor adv = forward_sweep(ckpt.network, ds.inputs + eta.eta).output();
  std::size_t clean_ok = 0, adv_ok = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    auto arg = [](std::span<const double> r) {
      return static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin());
    };
    clean_ok += arg(clean.row(i)) == ds.labels[i];
    adv_ok += arg(adv.row(i)) == ds.labels[i];
  }
  const double n = static_cast<double>(ds.size());
  fs::create_directories(out_dir);
  write_json(out_dir / "perturbations.json",
             {{"shape", eta.eta.shape()}, {"epsilon", eta.epsilon}, {"values", eta.eta.values()},
              {"resolved_config", to_json(c)}});
  write_json(out_dir / "attack.json", {{"clean_acc", clean_ok / n},
                                       {"attacked_acc", adv_ok / n},
                                       {"examples", ds.size()},
                                       {"attack", to_json(attack)},
                                       {"resolved_config", to_json(c)}});
  std::cout << "clean " << clean_ok / n << " attacked " << adv_ok / n << "\n";
  return 0;
}

int cmd_verify_pmp(const fs::path& ckpt_path, const std::string& config_path, PmpConfig pmp,
                   std::size_t examples, std::optional<double> epsilon, const fs::path& out) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const CliConfig c = config_for(config_path, ckpt);
  const LoadedData data = load_data(c);
  const std::size_t count = std::min(examples, data.train.size());
  std::vector<std::size_t> idx(count);
  for (std::size_t i = 0; i < count; ++i) idx[i] = i;
  const Dataset batch = data.train.subset(idx);

  const LossFunction loss{c.train.loss};
  const AttackConfig attack = *attack_from_flags(c, "pgd", std::nullopt, std::nullopt, epsilon);
  Rng rng(splitmix64(c.train.seed));
  const Perturbation eta =
      pgd_attack(ckpt.network, loss, batch.inputs, batch.targets(), attack, rng);
  const Regularizer reg =
      c.train.weight_decay > 0.0 ? Regularizer::l2(c.train.weight_decay) : Regularizer::none();
  const PmpReport report =
      verify_pmp(ckpt.network, loss, reg, batch.inputs, batch.targets(), eta, pmp);
  json j = to_json(report);
  j["examples"] = count;
  j["epsilon"] = attack.epsilon;
  j["resolved_config"] = to_json(c);
  write_json(out, j);
  std::cout << "weight violations " << report.weight_violations() << " / adversary violations "
            << report.adversary.violations << "\n";
  return 0;
}

// "r=5;m=5,n=3" -> [{r:5}, {m:5, n:3}]
std::vector<std::map<std::string, std::size_t>> parse_grid(const std::string& text) {
  std::vector<std::map<std::string, std::size_t>> grid;
  std::stringstream points(text);
  std::string point;
  while (std::getline(points, point, ';')) {
    if (point.empty()) continue;
    std::map<std::string, std::size_t> p;
    std::stringstream kvs(point);
    std::string kv;
    while (std::getline(kvs, kv, ',')) {
      const auto eq = kv.find('=');
      const std::string key = kv.substr(0, eq);
      if (eq == std::string::npos || (key != "m" && key != "n" && key != "r")) {
        throw ConfigError("grid", "bad entry '" + kv + "' (expected m=, n= or r=)");
      }
      try {
        p[key] = std::stoul(kv.substr(eq + 1));
      } catch (const std::exception&) {
        throw ConfigError("grid", "bad value in '" + kv + "'");
      }
    }
    grid.push_back(p);
  }
  return grid;
}

std::set<std::string> method_keys(Method m) {
  switch (m) {
    case Method::natural:
      return {};
    case Method::pgd:
    case Method::trades:
      return {"r"};
    case Method::free:
      return {"m"};
    case Method::yopo:
    case Method::trades_yopo:
      return {"m", "n"};
  }
  return {};
}

int cmd_bench(const std::string& config_path, const TrainFlags& flags, const std::string& methods,
              const std::string& grid_text, const fs::path& out) {
  CliConfig base = config_path.empty() ? CliConfig{} : cli_config_from_json(read_json(config_path));
  flags.apply(base.train);
  const LoadedData data = load_data(base);
  resolve_network(base, data.train);
  const auto grid = parse_grid(grid_text);

  std::ostringstream csv;
  csv << "# config: " << to_json(base).dump() << "\n";
  csv << "method,m,n,r,minibatches,expected_full,observed_full,expected_first_layer,"
         "observed_first_layer,audit_pass,adversary_updates,clean_acc,robust_acc,wall_ms\n";
  bool all_pass = true;
  std::stringstream list(methods);
  std::string name;
  while (std::getline(list, name, ',')) {
    Method method;
    try {
      method = parse_method(name);
    } catch (const ArgumentError& e) {
      throw ConfigError("methods", e.what());
    }
    const std::set<std::string> keys = method_keys(method);
    std::vector<std::map<std::string, std::size_t>> points;
    for (const auto& p : grid) {
      std::set<std::string> pk;
      for (const auto& [k, v] : p) pk.insert(k);
      if (pk == keys) points.push_back(p);
    }
    if (keys.empty()) points.push_back({});
    for (const auto& p : points) {
      CliConfig c = base;
      switch_method(c.train, method);
      c.train.m.reset();
      c.train.n.reset();
      c.train.r.reset();
      if (p.contains("m")) c.train.m = p.at("m");
      if (p.contains("n")) c.train.n = p.at("n");
      if (p.contains("r")) c.train.r = p.at("r");
      TrainOptions options;
      options.eval_data = data.test ? &*data.test : nullptr;
      options.eval_attack = resolved_eval(c);
      options.eval_each_epoch = false;
      const TrainResult result = train(c.train, data.train, build_network(c), options);
      const RunReport& rep = result.report;
      const PropCounts want = expected_counts(c.train, rep.minibatches);
      all_pass = all_pass && rep.audit.pass();
      auto opt = [](const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : ""; };
      csv << name << ',' << opt(c.train.m) << ',' << opt(c.train.n) << ',' << opt(c.train.r) << ','
          << rep.minibatches << ',' << want.full_forward << ',' << rep.counts.full_forward << ','
          << want.first_layer_forward << ',' << rep.counts.first_layer_forward << ','
          << (rep.audit.pass() ? "true" : "false") << ',' << rep.adversary_updates << ','
          << rep.epochs.back().clean_acc << ',' << rep.epochs.back().robust_acc << ','
          << rep.wall_ms << "\n";
    }
  }
  write_text(out, csv.str());
  std::cout << "wrote " << out.string() << (all_pass ? "" : " (audit FAILED)") << "\n";
  return all_pass ? 0 : 1;
}

int cmd_data_gen(const SyntheticSpec& spec, const std::string& format, const fs::path& prefix) {
  const Dataset ds = gen_synthetic(spec);
  const json meta = {{"kind", synthetic_name(spec.kind)}, {"dim", spec.dim},
                     {"examples", spec.examples},         {"margin", spec.margin},
                     {"noise", spec.noise},               {"seed", spec.seed}};
  if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());
  if (format == "json") {
    json rows = json::array();
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto r = ds.inputs.row(i);
      rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    write_json(prefix.string() + ".json",
               {{"spec", meta}, {"classes", ds.classes}, {"inputs", rows}, {"labels", ds.labels}});
    return 0;
  }
  // IDX holds bytes in [0, 1] after /255; synthetic points are mapped there by
  // a min/max affine map recorded next to the files.
  double lo = ds.inputs[0], hi = ds.inputs[0];
  for (double v : ds.inputs.values()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double scale = hi > lo ? 1.0 / (hi - lo) : 1.0;
  Tensor unit = ds.inputs;
  for (double& v : unit.values()) v = std::clamp((v - lo) * scale, 0.0, 1.0);
  write_file(prefix.string() + "-images.idx", write_idx(unit));
  IdxArray labels{{ds.size()}, std::vector<std::uint8_t>(ds.labels.begin(), ds.labels.end())};
  write_file(prefix.string() + "-labels.idx", write_idx_raw(labels));
  write_json(prefix.string() + "-meta.json",
             {{"spec", meta}, {"normalization", {{"scale", scale}, {"offset", -lo * scale}}}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial training with YOPO, PGD, Free and TRADES"};
  app.require_subcommand(1);

  std::string config_path;
  fs::path out_dir = default_out_dir();
  bool timing = false;
  TrainFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "train a network; writes checkpoint, report and metrics");
  train_cmd->add_option("--config", config_path, "JSON config file");
  train_cmd->add_option("--out-dir", out_dir, "output directory (default $YOPO_OUT_DIR or .)");
  train_cmd->add_flag("--timing", timing, "record wall times in the metrics");
  train_flags.add(train_cmd, true);

  fs::path ckpt_path;
  std::string attack_kind = "pgd";
  std::optional<std::size_t> steps;
  std::optional<double> step_size, attack_eps;
  fs::path out_file;

  auto* eval_cmd = app.add_subcommand("eval", "clean and robust accuracy of a checkpoint");
  eval_cmd->add_option("--checkpoint", ckpt_path)->required();
  eval_cmd->add_option("--config", config_path, "defaults to the config stored in the checkpoint");
  eval_cmd->add_option("--attack", attack_kind, "pgd|none")->check(CLI::IsMember({"pgd", "none"}));
  eval_cmd->add_option("--steps", steps);
  eval_cmd->add_option("--step-size", step_size);
  eval_cmd->add_option("--epsilon", attack_eps);
  eval_cmd->add_option("--out", out_file, "output JSON (default <out-dir>/eval.json)");

  auto* attack_cmd = app.add_subcommand("attack", "PGD perturbations for the evaluation set");
  attack_cmd->add_option("--checkpoint", ckpt_path)->required();
  attack_cmd->add_option("--config", config_path);
  attack_cmd->add_option("--steps", steps);
  attack_cmd->add_option("--step-size", step_size);
  attack_cmd->add_option("--epsilon", attack_eps);
  attack_cmd->add_option("--out-dir", out_dir);

  PmpConfig pmp;
  std::size_t pmp_examples = 64;
  auto* pmp_cmd = app.add_subcommand("verify-pmp", "sample the layerwise Hamiltonian conditions");
  pmp_cmd->add_option("--checkpoint", ckpt_path)->required();
  pmp_cmd->add_option("--config", config_path);
  pmp_cmd->add_option("--samples", pmp.samples);
  pmp_cmd->add_option("--radius", pmp.radius);
  pmp_cmd->add_option("--tolerance", pmp.tolerance);
  pmp_cmd->add_option("--pmp-seed", pmp.seed);
  pmp_cmd->add_option("--examples", pmp_examples, "training examples in the checked batch");
  pmp_cmd->add_option("--epsilon", attack_eps);
  pmp_cmd->add_option("--out", out_file, "output JSON (default <out-dir>/pmp.json)");

  std::string methods = "natural,pgd,yopo";
  std::string grid = "r=5;m=5,n=3";
  TrainFlags bench_flags;
  auto* bench_cmd = app.add_subcommand("bench", "methods x (m, n, r) grid with count audits");
  bench_cmd->add_option("--config", config_path);
  bench_cmd->add_option("--methods", methods, "comma-separated methods");
  bench_cmd->add_option("--grid", grid, "points separated by ';', e.g. \"r=5;m=5,n=3\"");
  bench_cmd->add_option("--out", out_file, "output CSV (default <out-dir>/bench.csv)");
  bench_flags.add(bench_cmd, false);

  SyntheticSpec spec;
  std::string kind = "two_gaussians";
  std::string format = "json";
  fs::path prefix = "data";
  auto* data_cmd = app.add_subcommand("data", "dataset utilities");
  data_cmd->require_subcommand(1);
  auto* gen_cmd = data_cmd->add_subcommand("gen", "write a synthetic dataset as JSON or IDX");
  gen_cmd->add_option("--kind", kind)->check(CLI::IsMember({"two_gaussians", "two_moons"}));
  gen_cmd->add_option("--dim", spec.dim);
  gen_cmd->add_option("--examples", spec.examples);
  gen_cmd->add_option("--margin", spec.margin);
  gen_cmd->add_option("--noise", spec.noise);
  gen_cmd->add_option("--seed", spec.seed);
  gen_cmd->add_option("--format", format)->check(CLI::IsMember({"json", "idx"}));
  gen_cmd->add_option("--out", prefix, "output path prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*train_cmd) return cmd_train(config_path, train_flags, out_dir, timing);
    if (*eval_cmd) {
      return cmd_eval(ckpt_path, config_path, attack_kind, steps, step_size, attack_eps,
                      out_file.empty() ? out_dir / "eval.json" : out_file);
    }
    if (*attack_cmd) return cmd_attack(ckpt_path, config_path, steps, step_size, attack_eps, out_dir);
    if (*pmp_cmd) {
      return cmd_verify_pmp(ckpt_path, config_path, pmp, pmp_examples, attack_eps,
                            out_file.empty() ? out_dir / "pmp.json" : out_file);
    }
    if (*bench_cmd) {
      return cmd_bench(config_path, bench_flags, methods, grid,
                       out_file.empty() ? out_dir / "bench.csv" : out_file);
    }
    if (*gen_cmd) {
      spec.kind = parse_synthetic(kind);
      return cmd_data_gen(spec, format, prefix);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
