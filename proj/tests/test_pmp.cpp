#include <gtest/gtest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "yopo/kernels.hpp"
#include "yopo/pmp.hpp"

using namespace yopo;
using namespace yopo::testing;

namespace {

// Least squares on one affine layer, driven to a stationary point by plain
// gradient descent.
struct Solved {
  Network net;
  Tensor x;
  Targets y;
  double grad_norm = 0.0;
};

Solved solve_least_squares(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t b = 20, d = 3;
  const Tensor x = random_batch(rng, b, d);
  const Targets y = Targets::values(random_batch(rng, b, 1));
  Network net({LayerSpec::affine(d, 1)}, {Tensor({d + 1})}, 1);
  const LossFunction se{LossKind::squared_error};
  double norm = 1.0;
  for (int it = 0; it < 20000 && norm > 1e-11; ++it) {
    const ObjectiveGradient g = objective_gradient(net, se, Regularizer::none(), x, y);
    norm = std::sqrt(kernels::dot(g.theta[0].values(), g.theta[0].values()));
    kernels::axpy(-0.2, g.theta[0].values(), net.params(0).values());
  }
  return {std::move(net), x, y, norm};
}

}  // namespace

TEST(Pmp, StationaryAffineLayerHasNoWeightViolations) {
  const Solved s = solve_least_squares(3);
  ASSERT_LE(s.grad_norm, 1e-10);
  PmpConfig cfg;
  cfg.samples = 500;
  cfg.radius = 0.5;
  cfg.tolerance = 1e-6;
  cfg.seed = 1;
  const PmpReport r = verify_pmp(s.net, LossFunction{LossKind::squared_error}, Regularizer::none(),
                                 s.x, s.y, {zeros_like(s.x), 0.0}, cfg);
  ASSERT_EQ(r.per_layer.size(), 1u);
  EXPECT_EQ(r.per_layer[0].samples, 500u);
  EXPECT_EQ(r.weight_violations(), 0u);
  EXPECT_LE(r.per_layer[0].max_gap, 1e-6);
}

TEST(Pmp, ZeroRadiusNeverViolates) {
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const Network net = random_network(rng);
    const Tensor x = random_batch(rng, 4, net.input_dim());
    const Targets y = random_labels(rng, 4, net.output_dim());
    PmpConfig cfg;
    cfg.samples = 50;
    cfg.radius = 0.0;
    cfg.tolerance = 0.0;
    const PmpReport r = verify_pmp(net, LossFunction{}, Regularizer::l2(0.01), x, y,
                                   {zeros_like(x), 0.0}, cfg);
    EXPECT_EQ(r.weight_violations(), 0u);
    EXPECT_EQ(r.adversary.violations, 0u);
  }
}

TEST(Pmp, UntrainedNetworkViolatesAndReportSerialises) {
  Rng rng(7);
  const std::vector<std::size_t> dims{3, 5, 2};
  const Network net = make_mlp(dims, Activation::tanh, rng);
  const Tensor x = random_batch(rng, 8, 3);
  const Targets y = random_labels(rng, 8, 2);
  PmpConfig cfg;
  cfg.samples = 200;
  cfg.radius = 0.5;
  const PmpReport r = verify_pmp(net, LossFunction{}, Regularizer::none(), x, y, {zeros_like(x), 0.1}, cfg);
  EXPECT_GT(r.weight_violations(), 0u);
  EXPECT_GT(r.weight_violation_rate(), 0.0);
  const auto j = to_json(r);
  EXPECT_TRUE(j.contains("per_layer"));
  EXPECT_EQ(j.at("per_layer").size(), r.per_layer.size());
}
