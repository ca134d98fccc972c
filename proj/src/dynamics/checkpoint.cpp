#include "yopo/checkpoint.hpp"

#include <fstream>

#include "yopo/error.hpp"

namespace yopo {

using nlohmann::json;

json checkpoint_to_json(const Checkpoint& ckpt) {
  const Network& net = ckpt.network;
  json layers = json::array();
  for (std::size_t t = 0; t < net.depth(); ++t) {
    const LayerSpec& l = net.layer(t);
    if (l.kind == LayerKind::affine) {
      const auto v = net.params(t).values();
      layers.push_back({{"kind", "affine"},
                        {"in_dim", l.in_dim},
                        {"out_dim", l.out_dim},
                        {"params", std::vector<double>(v.begin(), v.end())}});
    } else {
      layers.push_back({{"kind", "activation"},
                        {"activation", std::string(activation_name(l.activation))},
                        {"dim", l.in_dim}});
    }
  }
  return {{"format", "yopo-network"},
          {"version", kCheckpointVersion},
          {"first_layer_len", net.first_layer_len()},
          {"layers", layers},
          {"seed_lineage", net.seed_lineage()},
          {"metadata", ckpt.metadata}};
}

Checkpoint checkpoint_from_json(const json& j) {
  try {
    if (j.at("format") != "yopo-network") throw ArgumentError("checkpoint: unknown format");
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw ArgumentError("checkpoint: unsupported version " + j.at("version").dump());
    }
    std::vector<LayerSpec> layers;
    std::vector<Tensor> params;
    for (const auto& lj : j.at("layers")) {
      const std::string kind = lj.at("kind");
      if (kind == "affine") {
        const auto spec = LayerSpec::affine(lj.at("in_dim"), lj.at("out_dim"));
        auto values = lj.at("params").get<std::vector<double>>();
        params.emplace_back(std::vector<std::size_t>{values.size()}, std::move(values));
        layers.push_back(spec);
      } else if (kind == "activation") {
        layers.push_back(LayerSpec::act(parse_activation(lj.at("activation").get<std::string>()),
                                        lj.at("dim")));
        params.emplace_back();
      } else {
        throw ArgumentError("checkpoint: unknown layer kind '" + kind + "'");
      }
    }
    Checkpoint ckpt{Network(std::move(layers), std::move(params), j.at("first_layer_len")),
                    j.value("metadata", json::object())};
    for (std::uint64_t s : j.value("seed_lineage", std::vector<std::uint64_t>{})) {
      ckpt.network.add_seed(s);
    }
    return ckpt;
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("checkpoint: malformed JSON: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << checkpoint_to_json(ckpt).dump(1) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ArgumentError("checkpoint " + path.string() + ": " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace yopo
