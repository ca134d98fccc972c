#include "yopo/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "yopo/error.hpp"

namespace yopo {
namespace {

double log_sum_exp(std::span<const double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - m);
  return m + std::log(s);
}

int checked_label(const Targets& y, std::size_t i, std::size_t classes) {
  const int label = y.labels().at(i);
  if (label < 0 || static_cast<std::size_t>(label) >= classes) {
    throw ArgumentError("label " + std::to_string(label) + " out of range for " +
                        std::to_string(classes) + " outputs");
  }
  return label;
}

double target_value(const Targets& y, std::size_t i, std::size_t k, std::size_t width) {
  if (y.has_values()) return y.values().at(i, k);
  return static_cast<std::size_t>(checked_label(y, i, width)) == k ? 1.0 : 0.0;
}

}  // namespace

Targets Targets::classes(std::vector<int> labels) {
  Targets t;
  t.labels_ = std::move(labels);
  return t;
}

Targets Targets::values(Tensor targets) {
  Targets t;
  if (targets.rank() == 1) targets = targets.reshaped({1, targets.size()});
  t.values_ = std::move(targets);
  return t;
}

std::size_t Targets::size() const noexcept {
  return has_values() ? values_.rows() : labels_.size();
}

Targets Targets::select(std::span<const std::size_t> indices) const {
  if (has_values()) return values(values_.select_rows(indices));
  std::vector<int> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(labels_.at(i));
  return classes(std::move(out));
}

std::string_view loss_name(LossKind k) noexcept {
  return k == LossKind::softmax_cross_entropy ? "softmax_cross_entropy" : "squared_error";
}

LossKind parse_loss(std::string_view name) {
  if (name == "softmax_cross_entropy") return LossKind::softmax_cross_entropy;
  if (name == "squared_error") return LossKind::squared_error;
  throw ArgumentError("unknown loss '" + std::string(name) + "'");
}

double LossFunction::value(std::span<const double> out, const Targets& y, std::size_t i) const {
  if (kind == LossKind::softmax_cross_entropy) {
    const int label = checked_label(y, i, out.size());
    return log_sum_exp(out) - out[static_cast<std::size_t>(label)];
  }
  double s = 0.0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double d = out[k] - target_value(y, i, k, out.size());
    s += d * d;
  }
  return s;
}

void LossFunction::gradient(std::span<const double> out, const Targets& y, std::size_t i,
                            std::span<double> grad) const {
  if (grad.size() != out.size()) throw ShapeError("loss gradient buffer size mismatch");
  if (kind == LossKind::softmax_cross_entropy) {
    const int label = checked_label(y, i, out.size());
    const double lse = log_sum_exp(out);
    for (std::size_t k = 0; k < out.size(); ++k) grad[k] = std::exp(out[k] - lse);
    grad[static_cast<std::size_t>(label)] -= 1.0;
    return;
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    grad[k] = 2.0 * (out[k] - target_value(y, i, k, out.size()));
  }
}

double mean_loss(const LossFunction& loss, const Tensor& outputs, const Targets& y) {
  if (y.size() != outputs.rows()) throw ShapeError("targets and outputs disagree on batch size");
  double s = 0.0;
  for (std::size_t i = 0; i < outputs.rows(); ++i) s += loss.value(outputs.row(i), y, i);
  return s / static_cast<double>(outputs.rows());
}

Tensor loss_gradients(const LossFunction& loss, const Tensor& outputs, const Targets& y) {
  if (y.size() != outputs.rows()) throw ShapeError("targets and outputs disagree on batch size");
  if (y.has_values() && y.values().cols() != outputs.cols()) {
    throw ShapeError("target width does not match output width");
  }
  Tensor g = zeros_like(outputs);
  for (std::size_t i = 0; i < outputs.rows(); ++i) loss.gradient(outputs.row(i), y, i, g.row(i));
  return g;
}

double Regularizer::value(const Tensor& theta) const {
  if (kind == Kind::none || theta.empty()) return 0.0;
  double s = 0.0;
  for (double v : theta.values()) s += v * v;
  return 0.5 * coefficient * s;
}

Tensor Regularizer::gradient(const Tensor& theta) const {
  if (theta.empty()) return {};
  Tensor g = zeros_like(theta);
  if (kind == Kind::l2_weight) {
    for (std::size_t j = 0; j < theta.size(); ++j) g[j] = coefficient * theta[j];
  }
  return g;
}

std::vector<double> softmax(std::span<const double> logits) {
  const double lse = log_sum_exp(logits);
  std::vector<double> q(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) q[k] = std::exp(logits[k] - lse);
  return q;
}

double kl_divergence(std::span<const double> clean_logits, std::span<const double> adv_logits) {
  if (clean_logits.size() != adv_logits.size()) throw ShapeError("kl_divergence: width mismatch");
  const double lse_c = log_sum_exp(clean_logits);
  const double lse_a = log_sum_exp(adv_logits);
  double s = 0.0;
  for (std::size_t k = 0; k < clean_logits.size(); ++k) {
    const double log_q = clean_logits[k] - lse_c;
    const double log_q_adv = adv_logits[k] - lse_a;
    s += std::exp(log_q) * (log_q - log_q_adv);
  }
  return s;
}

}  // namespace yopo
