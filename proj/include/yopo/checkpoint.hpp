#pragma once

#include <filesystem>

#include "json.hpp"
#include "yopo/dynamics.hpp"

namespace yopo {

inline constexpr int kCheckpointVersion = 1;

// Network checkpoint, JSON:
//   {
//     "format": "yopo-network", "version": 1,
//     "first_layer_len": k0,
//     "layers": [ {"kind": "affine", "in_dim": n, "out_dim": m, "params": [m*n + m doubles]},
//                 {"kind": "activation", "activation": "tanh|softplus|relu", "dim": m}, ... ],
//     "seed_lineage": [uint64, ...],
//     "metadata": { ... }            // free-form, e.g. the resolved training config
//   }
// Doubles are written in shortest round-trip form, so save/load is lossless.
struct Checkpoint {
  Network network;
  nlohmann::json metadata = nlohmann::json::object();
};

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace yopo
