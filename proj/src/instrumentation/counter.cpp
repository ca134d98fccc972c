#include "yopo/instrumentation.hpp"
#include "yopo/training.hpp"

namespace yopo {

PropCounts operator-(const PropCounts& a, const PropCounts& b) {
  return {a.full_forward - b.full_forward, a.full_backward - b.full_backward,
          a.first_layer_forward - b.first_layer_forward,
          a.first_layer_backward - b.first_layer_backward};
}

const char* phase_name(Phase p) noexcept {
  switch (p) {
    case Phase::attack:
      return "attack";
    case Phase::weight_update:
      return "weight_update";
    case Phase::evaluation:
      return "evaluation";
  }
  return "unknown";
}

bool CountAudit::pass() const noexcept {
  for (const auto& c : categories) {
    if (!c.pass) return false;
  }
  return true;
}

PropCounts expected_counts(const TrainConfig& config, std::uint64_t minibatches) {
  std::uint64_t full = 1;
  std::uint64_t first = 0;
  switch (config.method) {
    case Method::natural:
      break;
    case Method::pgd:
    case Method::trades:
      full = config.r.value_or(1) + 1;
      break;
    case Method::yopo:
    case Method::trades_yopo:
      full = config.m.value_or(1) + 1;
      first = config.m.value_or(1) * config.n.value_or(1);
      break;
    case Method::free:
      full = config.m.value_or(1) + 1;
      first = config.m.value_or(1);
      break;
  }
  return {full * minibatches, full * minibatches, first * minibatches, first * minibatches};
}

CountAudit count_report(const PropCounter& counter, const TrainConfig& config,
                        std::uint64_t minibatches) {
  const PropCounts want = expected_counts(config, minibatches);
  const PropCounts& got = counter.totals();
  CountAudit audit;
  auto add = [&](const char* name, std::uint64_t e, std::uint64_t o) {
    audit.categories.push_back({name, e, o, e == o});
  };
  add("full_forward", want.full_forward, got.full_forward);
  add("full_backward", want.full_backward, got.full_backward);
  add("first_layer_forward", want.first_layer_forward, got.first_layer_forward);
  add("first_layer_backward", want.first_layer_backward, got.first_layer_backward);
  return audit;
}

}  // namespace yopo
