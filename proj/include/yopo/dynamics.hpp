#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "yopo/rng.hpp"
#include "yopo/tensor.hpp"

namespace yopo {

class PropCounter;

enum class LayerKind { affine, activation };
enum class Activation { tanh, softplus, relu };

std::string_view activation_name(Activation a) noexcept;
Activation parse_activation(std::string_view name);

// One step x_{t+1} = f_t(x_t, theta_t) of the network dynamics.
//
// Affine parameters are packed as [W (out x in, row-major), b (out)].
// Activation layers are parameter-free and have in_dim == out_dim.
struct LayerSpec {
  LayerKind kind = LayerKind::affine;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  Activation activation = Activation::tanh;

  static LayerSpec affine(std::size_t in, std::size_t out) {
    return {LayerKind::affine, in, out, Activation::tanh};
  }
  static LayerSpec act(Activation a, std::size_t dim) { return {LayerKind::activation, dim, dim, a}; }

  std::size_t param_count() const noexcept {
    return kind == LayerKind::affine ? out_dim * in_dim + out_dim : 0;
  }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// A chain of layers with parameters theta_t. The first `first_layer_len`
// layers form f_0, the part the adversary is coupled to; the rest is g.
class Network {
 public:
  Network() = default;
  Network(std::vector<LayerSpec> layers, std::vector<Tensor> params,
          std::size_t first_layer_len = 2);

  std::size_t depth() const noexcept { return layers_.size(); }
  const std::vector<LayerSpec>& layers() const noexcept { return layers_; }
  const LayerSpec& layer(std::size_t t) const { return layers_.at(t); }

  const std::vector<Tensor>& params() const noexcept { return params_; }
  std::vector<Tensor>& params() noexcept { return params_; }
  const Tensor& params(std::size_t t) const { return params_.at(t); }
  Tensor& params(std::size_t t) { return params_.at(t); }

  std::size_t first_layer_len() const noexcept { return first_layer_len_; }
  std::size_t input_dim() const { return layers_.front().in_dim; }
  std::size_t output_dim() const { return layers_.back().out_dim; }
  std::size_t split_dim() const { return layers_.at(first_layer_len_ - 1).out_dim; }
  std::size_t param_count() const noexcept;

  // Seeds that produced this network (initialisation, then training runs).
  const std::vector<std::uint64_t>& seed_lineage() const noexcept { return seed_lineage_; }
  void add_seed(std::uint64_t seed) { seed_lineage_.push_back(seed); }

  // Networks over layers [begin, end) sharing this network's parameters by value.
  Network slice(std::size_t begin, std::size_t end) const;

 private:
  std::vector<LayerSpec> layers_;
  std::vector<Tensor> params_;
  std::size_t first_layer_len_ = 2;
  std::vector<std::uint64_t> seed_lineage_;
};

// Affine/activation stack over `dims` (d_0, ..., d_L): every affine except
// the last is followed by `activation`. Weights and biases are drawn
// uniformly from +-1/sqrt(fan_in).
Network make_mlp(std::span<const std::size_t> dims, Activation activation, Rng& rng,
                 std::size_t first_layer_len = 2);

// States x_t, t = 0..T, each a batch [B, d_t].
struct Trajectory {
  std::vector<Tensor> states;

  const Tensor& input() const { return states.front(); }
  const Tensor& output() const { return states.back(); }
};

double activation_value(Activation a, double x) noexcept;
// relu'(0) is 0.
double activation_derivative(Activation a, double x) noexcept;

// f_t(x, theta_t). x is [d_t] or [B, d_t]; the result keeps x's rank.
Tensor layer_forward(const LayerSpec& layer, const Tensor& theta, const Tensor& x);
// grad_x f_t(x, theta_t)^T v.
Tensor vjp_x(const LayerSpec& layer, const Tensor& theta, const Tensor& x, const Tensor& v);
// grad_theta f_t(x, theta_t)^T v, summed over the batch; empty for activations.
Tensor vjp_theta(const LayerSpec& layer, const Tensor& theta, const Tensor& x, const Tensor& v);
// grad_x f_t(x, theta_t) delta.
Tensor jvp_x(const LayerSpec& layer, const Tensor& theta, const Tensor& x, const Tensor& delta);

// Runs layers [begin, end) on x0 and returns the end - begin + 1 states.
// Does not touch counters.
Trajectory forward_range(const Network& net, const Tensor& x0, std::size_t begin, std::size_t end);

// Pulls the cotangent v at the last state of `range` (produced by
// forward_range(net, x, begin, ...)) back to the first. Does not touch counters.
Tensor pullback_range(const Network& net, const Trajectory& range, std::size_t begin,
                      const Tensor& v);

// Full forward propagation; counts one full forward per call.
Trajectory forward_sweep(const Network& net, const Tensor& x0, PropCounter* counter = nullptr);

void check_network(const Network& net);

}  // namespace yopo
