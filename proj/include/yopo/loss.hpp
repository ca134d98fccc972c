#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "yopo/tensor.hpp"

namespace yopo {

// Per-example supervision: class ids, or real-valued targets [B, d_T].
class Targets {
 public:
  Targets() = default;
  static Targets classes(std::vector<int> labels);
  static Targets values(Tensor targets);

  std::size_t size() const noexcept;
  bool has_values() const noexcept { return !values_.empty(); }
  const std::vector<int>& labels() const noexcept { return labels_; }
  const Tensor& values() const noexcept { return values_; }

  Targets select(std::span<const std::size_t> indices) const;

 private:
  std::vector<int> labels_;
  Tensor values_;
};

enum class LossKind { softmax_cross_entropy, squared_error };

std::string_view loss_name(LossKind k) noexcept;
LossKind parse_loss(std::string_view name);

// Data-fitting loss l_i on the network output.
//   softmax_cross_entropy: logsumexp(z) - z_y                 (class targets)
//   squared_error:         sum_k (z_k - y_k)^2                (value targets,
//                          or one-hot of the class id)
struct LossFunction {
  LossKind kind = LossKind::softmax_cross_entropy;

  double value(std::span<const double> out, const Targets& y, std::size_t i) const;
  void gradient(std::span<const double> out, const Targets& y, std::size_t i,
                std::span<double> grad) const;
};

double mean_loss(const LossFunction& loss, const Tensor& outputs, const Targets& y);
// Unscaled per-example gradients grad l_i, shape of `outputs`.
Tensor loss_gradients(const LossFunction& loss, const Tensor& outputs, const Targets& y);

// R_t(x, theta_t) = (lambda / 2) ||theta_t||^2, independent of x.
struct Regularizer {
  enum class Kind { none, l2_weight };
  Kind kind = Kind::none;
  double coefficient = 0.0;

  static Regularizer none() { return {}; }
  static Regularizer l2(double lambda) { return {Kind::l2_weight, lambda}; }

  double value(const Tensor& theta) const;
  // grad_theta R_t; the empty tensor for parameter-free layers.
  Tensor gradient(const Tensor& theta) const;
};

std::vector<double> softmax(std::span<const double> logits);
// KL(softmax(clean) || softmax(adv)).
double kl_divergence(std::span<const double> clean_logits, std::span<const double> adv_logits);

}  // namespace yopo
