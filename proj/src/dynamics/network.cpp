#include <cmath>
#include <string>

#include "yopo/dynamics.hpp"
#include "yopo/error.hpp"
#include "yopo/instrumentation.hpp"

namespace yopo {

std::string_view activation_name(Activation a) noexcept {
  switch (a) {
    case Activation::tanh:
      return "tanh";
    case Activation::softplus:
      return "softplus";
    case Activation::relu:
      return "relu";
  }
  return "unknown";
}

Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "softplus") return Activation::softplus;
  if (name == "relu") return Activation::relu;
  throw ArgumentError("unknown activation '" + std::string(name) + "'");
}

Network::Network(std::vector<LayerSpec> layers, std::vector<Tensor> params,
                 std::size_t first_layer_len)
    : layers_(std::move(layers)), params_(std::move(params)), first_layer_len_(first_layer_len) {
  check_network(*this);
}

std::size_t Network::param_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.param_count();
  return n;
}

Network Network::slice(std::size_t begin, std::size_t end) const {
  if (begin >= end || end > depth()) throw ArgumentError("slice: invalid layer range");
  std::vector<LayerSpec> layers(layers_.begin() + begin, layers_.begin() + end);
  std::vector<Tensor> params(params_.begin() + begin, params_.begin() + end);
  const std::size_t k0 = std::min(first_layer_len_ > begin ? first_layer_len_ - begin : 1, end - begin);
  return Network(std::move(layers), std::move(params), k0);
}

void check_network(const Network& net) {
  const auto& layers = net.layers();
  if (layers.empty()) throw ShapeError("network has no layers");
  if (net.params().size() != layers.size()) throw ShapeError("one parameter tensor per layer required");
  if (net.first_layer_len() < 1 || net.first_layer_len() > layers.size()) {
    throw ShapeError("first_layer_len must be in [1, depth]");
  }
  for (std::size_t t = 0; t < layers.size(); ++t) {
    const auto& l = layers[t];
    const std::string where = "layer " + std::to_string(t);
    if (l.in_dim == 0 || l.out_dim == 0) throw ShapeError(where + ": dimensions must be positive");
    if (l.kind == LayerKind::activation && l.in_dim != l.out_dim) {
      throw ShapeError(where + ": activation layers preserve dimension");
    }
    if (net.params(t).size() != l.param_count()) {
      throw ShapeError(where + ": expected " + std::to_string(l.param_count()) + " parameters");
    }
    if (t > 0 && layers[t - 1].out_dim != l.in_dim) {
      throw ShapeError(where + ": input " + std::to_string(l.in_dim) + " does not chain with " +
                       std::to_string(layers[t - 1].out_dim));
    }
  }
}

Network make_mlp(std::span<const std::size_t> dims, Activation activation, Rng& rng,
                 std::size_t first_layer_len) {
  if (dims.size() < 2) throw ArgumentError("make_mlp: need at least input and output widths");
  std::vector<LayerSpec> layers;
  std::vector<Tensor> params;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const auto spec = LayerSpec::affine(dims[i], dims[i + 1]);
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims[i]));
    params.push_back(sample_uniform(rng, {spec.param_count()}, -bound, bound));
    layers.push_back(spec);
    if (i + 2 < dims.size()) {
      layers.push_back(LayerSpec::act(activation, dims[i + 1]));
      params.emplace_back();
    }
  }
  Network net(std::move(layers), std::move(params), std::min(first_layer_len, dims.size() * 2 - 3));
  net.add_seed(rng.seed());
  return net;
}

Trajectory forward_range(const Network& net, const Tensor& x0, std::size_t begin, std::size_t end) {
  if (begin > end || end > net.depth()) throw ArgumentError("forward_range: invalid layer range");
  Trajectory traj;
  traj.states.reserve(end - begin + 1);
  traj.states.push_back(x0);
  for (std::size_t t = begin; t < end; ++t) {
    traj.states.push_back(layer_forward(net.layer(t), net.params(t), traj.states.back()));
  }
  return traj;
}

Tensor pullback_range(const Network& net, const Trajectory& range, std::size_t begin,
                      const Tensor& v) {
  if (range.states.empty()) throw ShapeError("pullback_range: empty trajectory");
  const std::size_t steps = range.states.size() - 1;
  if (begin + steps > net.depth()) {
    throw ShapeError("pullback_range: trajectory does not fit the network");
  }
  Tensor cot = v;
  for (std::size_t s = steps; s-- > 0;) {
    const std::size_t t = begin + s;
    cot = vjp_x(net.layer(t), net.params(t), range.states[s], cot);
  }
  return cot;
}

Trajectory forward_sweep(const Network& net, const Tensor& x0, PropCounter* counter) {
  Trajectory traj = forward_range(net, x0, 0, net.depth());
  if (counter) counter->add_full_forward();
  return traj;
}

}  // namespace yopo
