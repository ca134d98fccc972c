#include <gtest/gtest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "yopo/checkpoint.hpp"
#include "yopo/error.hpp"
#include "yopo/instrumentation.hpp"
#include "yopo/kernels.hpp"

using namespace yopo;
using namespace yopo::testing;

TEST(Layers, AffineForwardOnBatchAndSingleExample) {
  const LayerSpec l = LayerSpec::affine(2, 2);
  const Tensor theta = Tensor::vector({1, 2, 3, 4, 0.5, -0.5});
  const Tensor x = Tensor::matrix(2, 2, {1, 1, 0, -1});
  EXPECT_EQ(layer_forward(l, theta, x), Tensor::matrix(2, 2, {3.5, 6.5, -1.5, -4.5}));
  const Tensor single = layer_forward(l, theta, Tensor::vector({1, 1}));
  EXPECT_EQ(single.rank(), 1u);
  EXPECT_EQ(single, Tensor::vector({3.5, 6.5}));
}

TEST(Layers, ActivationValues) {
  EXPECT_DOUBLE_EQ(activation_value(Activation::relu, -1.0), 0.0);
  EXPECT_DOUBLE_EQ(activation_derivative(Activation::relu, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(activation_derivative(Activation::relu, 2.0), 1.0);
  EXPECT_NEAR(activation_value(Activation::softplus, 0.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(activation_value(Activation::softplus, 800.0), 800.0, 1e-12);
  EXPECT_TRUE(std::isfinite(activation_value(Activation::softplus, -800.0)));
  EXPECT_NEAR(activation_derivative(Activation::tanh, 0.3), 1 - std::tanh(0.3) * std::tanh(0.3), 1e-15);
}

TEST(Layers, ShapeMismatchThrows) {
  const LayerSpec l = LayerSpec::affine(3, 2);
  EXPECT_THROW(layer_forward(l, Tensor({7}), Tensor({1, 3})), ShapeError);
  EXPECT_THROW(layer_forward(l, Tensor({8}), Tensor({1, 2})), ShapeError);
  EXPECT_THROW(vjp_x(l, Tensor({8}), Tensor({1, 3}), Tensor({1, 3})), ShapeError);
}

TEST(Layers, JacobianProductsMatchFiniteDifferences) {
  Rng rng(23);
  for (const LayerSpec l : {LayerSpec::affine(4, 3), LayerSpec::act(Activation::tanh, 5),
                            LayerSpec::act(Activation::softplus, 5)}) {
    const Tensor theta = l.param_count() ? sample_uniform(rng, {l.param_count()}, -1, 1) : Tensor();
    const Tensor x = random_batch(rng, 2, l.in_dim);
    const Tensor v = random_batch(rng, 2, l.out_dim);
    // d/dx of v . f(x) is vjp_x; d/dtheta is vjp_theta.
    const Tensor gx = finite_diff_grad(
        [&](const Tensor& s) { return kernels::dot(v.values(), layer_forward(l, theta, s).values()); }, x);
    EXPECT_LT(relative_error(vjp_x(l, theta, x, v), gx), 1e-8);
    if (!theta.empty()) {
      const Tensor gt = finite_diff_grad(
          [&](const Tensor& t) { return kernels::dot(v.values(), layer_forward(l, t, x).values()); }, theta);
      EXPECT_LT(relative_error(vjp_theta(l, theta, x, v), gt), 1e-8);
    } else {
      EXPECT_TRUE(vjp_theta(l, theta, x, v).empty());
    }
    // <v, J delta> == <J^T v, delta>
    const Tensor delta = random_batch(rng, 2, l.in_dim);
    EXPECT_NEAR(kernels::dot(v.values(), jvp_x(l, theta, x, delta).values()),
                kernels::dot(vjp_x(l, theta, x, v).values(), delta.values()), 1e-12);
  }
}

TEST(Network, MakeMlpStructure) {
  Rng rng(1);
  const std::vector<std::size_t> dims{10, 32, 32, 2};
  const Network net = make_mlp(dims, Activation::tanh, rng);
  ASSERT_EQ(net.depth(), 5u);
  EXPECT_EQ(net.layer(1).kind, LayerKind::activation);
  EXPECT_EQ(net.layer(4).kind, LayerKind::affine);
  EXPECT_EQ(net.first_layer_len(), 2u);
  EXPECT_EQ(net.split_dim(), 32u);
  EXPECT_EQ(net.param_count(), 10u * 32 + 32 + 32 * 32 + 32 + 32 * 2 + 2);
  for (double w : net.params(0).values()) EXPECT_LE(std::abs(w), 1 / std::sqrt(10.0));
  EXPECT_EQ(net.seed_lineage(), std::vector<std::uint64_t>{1});
}

TEST(Network, RejectsBrokenChains) {
  EXPECT_THROW(Network({LayerSpec::affine(2, 3), LayerSpec::affine(2, 1)}, {Tensor({9}), Tensor({3})}, 1),
               ShapeError);
  EXPECT_THROW(Network({LayerSpec::affine(2, 3)}, {Tensor({9})}, 2), ShapeError);
  EXPECT_THROW(Network({LayerSpec::affine(2, 3)}, {Tensor({5})}, 1), ShapeError);
}

TEST(Network, ForwardSweepCountsOncePerCall) {
  Rng rng(2);
  const std::vector<std::size_t> dims{3, 4, 2};
  const Network net = make_mlp(dims, Activation::tanh, rng);
  PropCounter counter;
  const Trajectory traj = forward_sweep(net, random_batch(rng, 5, 3), &counter);
  EXPECT_EQ(traj.states.size(), net.depth() + 1);
  EXPECT_EQ(counter.totals().full_forward, 1u);
  EXPECT_EQ(counter.totals().first_layer_forward, 0u);
  forward_range(net, traj.input(), 0, net.first_layer_len());
  EXPECT_EQ(counter.totals().full_forward, 1u);
}

TEST(Network, RangesComposeToTheFullSweep) {
  Rng rng(3);
  const Network net = random_network(rng);
  const Tensor x = random_batch(rng, 3, net.input_dim());
  const Trajectory full = forward_sweep(net, x);
  const std::size_t k = net.first_layer_len();
  const Trajectory head = forward_range(net, x, 0, k);
  const Trajectory tail = forward_range(net, head.output(), k, net.depth());
  EXPECT_EQ(tail.output(), full.output());
}

TEST(Network, PullbackMatchesFiniteDifference) {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const Network net = random_network(rng);
    const std::size_t k = net.first_layer_len();
    const Tensor x = random_batch(rng, 2, net.input_dim());
    const Tensor v = random_batch(rng, 2, net.split_dim());
    const Trajectory head = forward_range(net, x, 0, k);
    const Tensor g = finite_diff_grad(
        [&](const Tensor& s) { return kernels::dot(v.values(), forward_range(net, s, 0, k).output().values()); },
        x);
    EXPECT_LT(relative_error(pullback_range(net, head, 0, v), g), 1e-8);
  }
}

TEST(Network, SliceKeepsParameters) {
  Rng rng(5);
  const std::vector<std::size_t> dims{3, 4, 4, 2};
  const Network net = make_mlp(dims, Activation::softplus, rng);
  const Network tail = net.slice(2, 5);
  EXPECT_EQ(tail.depth(), 3u);
  EXPECT_EQ(tail.params(0), net.params(2));
  EXPECT_THROW(net.slice(3, 3), ArgumentError);
}

TEST(Checkpoint, RoundTripIsLossless) {
  Rng rng(6);
  const std::vector<std::size_t> dims{4, 7, 3};
  Network net = make_mlp(dims, Activation::softplus, rng, 1);
  net.add_seed(99);
  net.params(0)[0] = 0.1 + 1e-17;
  const Checkpoint in{net, {{"note", "x"}}};
  const Checkpoint out = checkpoint_from_json(nlohmann::json::parse(checkpoint_to_json(in).dump()));
  EXPECT_EQ(out.network.layers(), net.layers());
  EXPECT_EQ(out.network.params(), net.params());
  EXPECT_EQ(out.network.first_layer_len(), 1u);
  EXPECT_EQ(out.network.seed_lineage(), net.seed_lineage());
  EXPECT_EQ(out.metadata.at("note"), "x");
}

TEST(Checkpoint, MalformedInputIsRejected) {
  Rng rng(7);
  const std::vector<std::size_t> dims{2, 2};
  auto j = checkpoint_to_json({make_mlp(dims, Activation::tanh, rng, 1), {}});
  auto bad_format = j;
  bad_format["format"] = "other";
  EXPECT_THROW(checkpoint_from_json(bad_format), ArgumentError);
  auto bad_version = j;
  bad_version["version"] = 2;
  EXPECT_THROW(checkpoint_from_json(bad_version), ArgumentError);
  auto short_params = j;
  short_params["layers"][0]["params"].erase(0);
  EXPECT_ANY_THROW(checkpoint_from_json(short_params));
  EXPECT_THROW(checkpoint_from_json(nlohmann::json::array()), ArgumentError);
}
