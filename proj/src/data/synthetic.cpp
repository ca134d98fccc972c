#include <cmath>
#include <numbers>

#include "yopo/data.hpp"
#include "yopo/error.hpp"
#include "yopo/rng.hpp"

namespace yopo {

std::string_view synthetic_name(SyntheticKind k) noexcept {
  return k == SyntheticKind::two_gaussians ? "two_gaussians" : "two_moons";
}

SyntheticKind parse_synthetic(std::string_view name) {
  if (name == "two_gaussians") return SyntheticKind::two_gaussians;
  if (name == "two_moons") return SyntheticKind::two_moons;
  throw ArgumentError("unknown synthetic dataset '" + std::string(name) + "'");
}

void SyntheticSpec::validate() const {
  if (examples < 2) throw ArgumentError("synthetic: need at least 2 examples");
  if (dim < 1) throw ArgumentError("synthetic: dim must be at least 1");
  if (kind == SyntheticKind::two_moons && dim < 2) throw ArgumentError("two_moons: dim must be >= 2");
  if (!(noise >= 0.0)) throw ArgumentError("synthetic: noise must be non-negative");
  if (!std::isfinite(margin)) throw ArgumentError("synthetic: margin must be finite");
}

Dataset gen_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  Dataset ds;
  ds.inputs = Tensor({spec.examples, spec.dim});
  ds.labels.resize(spec.examples);
  ds.classes = 2;
  for (std::size_t i = 0; i < spec.examples; ++i) {
    const int label = static_cast<int>(i % 2);
    ds.labels[i] = label;
    auto row = ds.inputs.row(i);
    if (spec.kind == SyntheticKind::two_gaussians) {
      row[0] = label == 0 ? -0.5 * spec.margin : 0.5 * spec.margin;
    } else {
      const double angle = std::numbers::pi * rng.uniform01();
      if (label == 0) {
        row[0] = std::cos(angle);
        row[1] = std::sin(angle);
      } else {
        row[0] = 1.0 - std::cos(angle);
        row[1] = 0.5 - std::sin(angle) - spec.margin;
      }
    }
    for (double& v : row) v += spec.noise * rng.normal();
  }
  return ds;
}

}  // namespace yopo
