#include <algorithm>
#include <numeric>

#include "yopo/error.hpp"
#include "yopo/training.hpp"

namespace yopo {
namespace {

int argmax(std::span<const double> row) {
  return static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
}

}  // namespace

AttackConfig default_eval_attack(double epsilon) {
  AttackConfig a;
  a.steps = 20;
  a.step_size = epsilon / 4.0;
  a.epsilon = epsilon;
  a.direction = Direction::sign;
  a.init = Init::uniform;
  a.project_each_step = true;
  return a;
}

Accuracy evaluate(const Network& net, const LossFunction& loss, const Dataset& data,
                  const std::optional<AttackConfig>& attack, std::uint64_t seed,
                  std::size_t batch_size) {
  if (batch_size == 0) throw ArgumentError("evaluate: batch size must be positive");
  if (data.dim() != net.input_dim()) throw ShapeError("evaluate: dataset and network input dims differ");
  if (data.size() == 0) return {};
  Rng rng(seed);
  std::size_t clean = 0;
  std::size_t robust = 0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < data.size(); start += batch_size) {
    const std::size_t end = std::min(data.size(), start + batch_size);
    idx.resize(end - start);
    std::iota(idx.begin(), idx.end(), start);
    const Tensor x = data.inputs.select_rows(idx);
    const Targets y = data.targets().select(idx);

    const Tensor out = forward_sweep(net, x).output();
    std::vector<bool> ok(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) ok[i] = argmax(out.row(i)) == y.labels()[i];

    std::vector<bool> ok_adv = ok;
    if (attack) {
      const Perturbation eta = pgd_attack(net, loss, x, y, *attack, rng);
      const Tensor adv = forward_sweep(net, x + eta.eta).output();
      for (std::size_t i = 0; i < idx.size(); ++i) ok_adv[i] = argmax(adv.row(i)) == y.labels()[i];
    }
    for (std::size_t i = 0; i < idx.size(); ++i) {
      clean += ok[i];
      robust += ok[i] && ok_adv[i];
    }
  }
  const double n = static_cast<double>(data.size());
  return {static_cast<double>(clean) / n, static_cast<double>(robust) / n};
}

}  // namespace yopo
