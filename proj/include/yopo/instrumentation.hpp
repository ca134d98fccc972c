#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

namespace yopo {

struct TrainConfig;

// Propagation counts. A "full" propagation runs all T layers; a "first-layer"
// propagation runs only the k0 layers of f_0. The categories are disjoint: a
// full pass never touches the first-layer counters.
struct PropCounts {
  std::uint64_t full_forward = 0;
  std::uint64_t full_backward = 0;
  std::uint64_t first_layer_forward = 0;
  std::uint64_t first_layer_backward = 0;

  friend bool operator==(const PropCounts&, const PropCounts&) = default;
};

PropCounts operator-(const PropCounts& a, const PropCounts& b);

enum class Phase : std::size_t { attack = 0, weight_update = 1, evaluation = 2 };
inline constexpr std::size_t kPhaseCount = 3;
const char* phase_name(Phase p) noexcept;

// Single-writer counter owned by the training loop. Counting is per batch
// call, not per example. Counts only ever increase.
class PropCounter {
 public:
  void add_full_forward() noexcept { ++totals_.full_forward; }
  void add_full_backward() noexcept { ++totals_.full_backward; }
  void add_first_layer_forward() noexcept { ++totals_.first_layer_forward; }
  void add_first_layer_backward() noexcept { ++totals_.first_layer_backward; }

  const PropCounts& totals() const noexcept { return totals_; }

  void begin_minibatch() noexcept { minibatch_start_ = totals_; }
  PropCounts minibatch() const noexcept { return totals_ - minibatch_start_; }

  void add_time(Phase p, double ms) noexcept { wall_ms_[static_cast<std::size_t>(p)] += ms; }
  double wall_ms(Phase p) const noexcept { return wall_ms_[static_cast<std::size_t>(p)]; }

 private:
  PropCounts totals_;
  PropCounts minibatch_start_;
  std::array<double, kPhaseCount> wall_ms_{};
};

// Adds the elapsed wall time to a phase on destruction.
class PhaseTimer {
 public:
  PhaseTimer(PropCounter* counter, Phase phase)
      : counter_(counter), phase_(phase), start_(std::chrono::steady_clock::now()) {}
  ~PhaseTimer() {
    if (counter_) {
      const auto dt = std::chrono::steady_clock::now() - start_;
      counter_->add_time(phase_, std::chrono::duration<double, std::milli>(dt).count());
    }
  }
  PhaseTimer(const PhaseTimer&) = delete;
  PhaseTimer& operator=(const PhaseTimer&) = delete;

 private:
  PropCounter* counter_;
  Phase phase_;
  std::chrono::steady_clock::time_point start_;
};

struct CategoryAudit {
  std::string category;
  std::uint64_t expected = 0;
  std::uint64_t observed = 0;
  bool pass = false;
};

struct CountAudit {
  std::vector<CategoryAudit> categories;
  bool pass() const noexcept;
};

// Closed-form propagation counts for a whole run of `minibatches` minibatches.
// Per minibatch: natural 1 full; pgd r+1 full; trades r+1 full;
// yopo and trades_yopo m+1 full and m*n first-layer; free m+1 full and m first-layer.
PropCounts expected_counts(const TrainConfig& config, std::uint64_t minibatches);

CountAudit count_report(const PropCounter& counter, const TrainConfig& config,
                        std::uint64_t minibatches);

}  // namespace yopo
