#include <cmath>
#include <string>

#include "yopo/dynamics.hpp"
#include "yopo/error.hpp"
#include "yopo/kernels.hpp"

namespace yopo {
namespace {

Tensor batch_like(const Tensor& x, std::size_t width) {
  if (x.rank() == 1) return Tensor({width});
  return Tensor({x.rows(), width});
}

void check_input(const LayerSpec& layer, const Tensor& theta, const Tensor& x, const char* op) {
  if (x.empty() || x.rank() > 2 || x.cols() != layer.in_dim) {
    throw ShapeError(std::string(op) + ": input width " + std::to_string(x.cols()) +
                     " does not match layer input " + std::to_string(layer.in_dim));
  }
  if (theta.size() != layer.param_count()) {
    throw ShapeError(std::string(op) + ": parameter count " + std::to_string(theta.size()) +
                     " does not match layer (" + std::to_string(layer.param_count()) + ")");
  }
}

void check_cotangent(const LayerSpec& layer, const Tensor& x, const Tensor& v, const char* op) {
  if (v.rows() != x.rows() || v.cols() != layer.out_dim) {
    throw ShapeError(std::string(op) + ": cotangent must be [" + std::to_string(x.rows()) + "," +
                     std::to_string(layer.out_dim) + "]");
  }
}

}  // namespace

double activation_value(Activation a, double x) noexcept {
  switch (a) {
    case Activation::tanh:
      return std::tanh(x);
    case Activation::softplus:
      return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    case Activation::relu:
      return x > 0.0 ? x : 0.0;
  }
  return 0.0;
}

double activation_derivative(Activation a, double x) noexcept {
  switch (a) {
    case Activation::tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Activation::softplus: {
      if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
      const double e = std::exp(x);
      return e / (1.0 + e);
    }
    case Activation::relu:
      return x > 0.0 ? 1.0 : 0.0;
  }
  return 0.0;
}

Tensor layer_forward(const LayerSpec& layer, const Tensor& theta, const Tensor& x) {
  check_input(layer, theta, x, "layer_forward");
  Tensor y = batch_like(x, layer.out_dim);
  if (layer.kind == LayerKind::affine) {
    const double* w = theta.data();
    const double* b = w + layer.out_dim * layer.in_dim;
    const auto& k = kernels::active();
    for (std::size_t i = 0; i < x.rows(); ++i) {
      k.gemv(w, layer.out_dim, layer.in_dim, x.row(i).data(), b, y.row(i).data());
    }
  } else {
    for (std::size_t j = 0; j < x.size(); ++j) y[j] = activation_value(layer.activation, x[j]);
  }
  return y;
}

Tensor vjp_x(const LayerSpec& layer, const Tensor& theta, const Tensor& x, const Tensor& v) {
  check_input(layer, theta, x, "vjp_x");
  check_cotangent(layer, x, v, "vjp_x");
  Tensor out = batch_like(x, layer.in_dim);
  if (layer.kind == LayerKind::affine) {
    const auto& k = kernels::active();
    for (std::size_t i = 0; i < x.rows(); ++i) {
      k.gemv_t(theta.data(), layer.out_dim, layer.in_dim, v.row(i).data(), out.row(i).data());
    }
  } else {
    for (std::size_t j = 0; j < x.size(); ++j) {
      out[j] = v[j] * activation_derivative(layer.activation, x[j]);
    }
  }
  return out;
}

Tensor vjp_theta(const LayerSpec& layer, const Tensor& theta, const Tensor& x, const Tensor& v) {
  check_input(layer, theta, x, "vjp_theta");
  check_cotangent(layer, x, v, "vjp_theta");
  if (layer.kind != LayerKind::affine) return {};
  Tensor g({layer.param_count()});
  double* gw = g.data();
  double* gb = gw + layer.out_dim * layer.in_dim;
  const auto& k = kernels::active();
  for (std::size_t i = 0; i < x.rows(); ++i) {
    k.ger(1.0, v.row(i).data(), layer.out_dim, x.row(i).data(), layer.in_dim, gw);
    k.axpy(1.0, v.row(i).data(), gb, layer.out_dim);
  }
  return g;
}

Tensor jvp_x(const LayerSpec& layer, const Tensor& theta, const Tensor& x, const Tensor& delta) {
  check_input(layer, theta, x, "jvp_x");
  if (delta.shape() != x.shape()) throw ShapeError("jvp_x: tangent must match input shape");
  Tensor out = batch_like(x, layer.out_dim);
  if (layer.kind == LayerKind::affine) {
    const auto& k = kernels::active();
    for (std::size_t i = 0; i < x.rows(); ++i) {
      k.gemv(theta.data(), layer.out_dim, layer.in_dim, delta.row(i).data(), nullptr,
             out.row(i).data());
    }
  } else {
    for (std::size_t j = 0; j < x.size(); ++j) {
      out[j] = activation_derivative(layer.activation, x[j]) * delta[j];
    }
  }
  return out;
}

}  // namespace yopo
