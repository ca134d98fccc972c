#include <gtest/gtest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "yopo/error.hpp"
#include "yopo/instrumentation.hpp"
#include "yopo/kernels.hpp"

using namespace yopo;
using namespace yopo::testing;

TEST(Loss, CrossEntropyValue) {
  const LossFunction ce{LossKind::softmax_cross_entropy};
  const Tensor z = Tensor::matrix(1, 3, {1.0, 2.0, 3.0});
  const Targets y = Targets::classes({2});
  const double lse = std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0));
  EXPECT_NEAR(mean_loss(ce, z, y), lse - 3.0, 1e-14);
  EXPECT_THROW(mean_loss(ce, z, Targets::classes({3})), ArgumentError);
}

TEST(Loss, CrossEntropyIsStableForLargeLogits) {
  const LossFunction ce{LossKind::softmax_cross_entropy};
  const Tensor z = Tensor::matrix(1, 2, {1000.0, -1000.0});
  EXPECT_NEAR(mean_loss(ce, z, Targets::classes({0})), 0.0, 1e-12);
  EXPECT_NEAR(mean_loss(ce, z, Targets::classes({1})), 2000.0, 1e-9);
}

TEST(Loss, SquaredErrorWithValuesAndOneHot) {
  const LossFunction se{LossKind::squared_error};
  const Tensor z = Tensor::matrix(1, 2, {0.5, 0.5});
  EXPECT_DOUBLE_EQ(mean_loss(se, z, Targets::values(Tensor::matrix(1, 2, {1.0, 0.0}))), 0.5);
  EXPECT_DOUBLE_EQ(mean_loss(se, z, Targets::classes({0})), 0.5);
}

TEST(Loss, GradientsMatchFiniteDifferences) {
  Rng rng(8);
  for (LossKind kind : {LossKind::softmax_cross_entropy, LossKind::squared_error}) {
    const LossFunction loss{kind};
    const Tensor z = random_batch(rng, 3, 4, 2.0);
    const Targets y = random_labels(rng, 3, 4);
    const Tensor fd = finite_diff_grad(
        [&](const Tensor& s) { return 3.0 * mean_loss(loss, s, y); }, z);
    EXPECT_LT(relative_error(loss_gradients(loss, z, y), fd), 1e-8);
  }
}

TEST(Loss, RegularizerValueAndGradient) {
  const Regularizer r = Regularizer::l2(0.1);
  const Tensor theta = Tensor::vector({1.0, -2.0});
  EXPECT_DOUBLE_EQ(r.value(theta), 0.05 * 5.0);
  EXPECT_EQ(r.gradient(theta), Tensor::vector({0.1, -0.2}));
  EXPECT_TRUE(r.gradient(Tensor()).empty());
  EXPECT_EQ(Regularizer::none().value(theta), 0.0);
}

TEST(Loss, KlDivergence) {
  const std::vector<double> a{0.3, -1.0, 2.0};
  EXPECT_NEAR(kl_divergence(a, a), 0.0, 1e-15);
  const std::vector<double> b{1.0, 0.0, 0.0};
  EXPECT_GT(kl_divergence(a, b), 0.0);
  const auto p = softmax(a);
  EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-15);
}

TEST(Costate, TerminalCostateIsScaledNegativeGradient) {
  const LossFunction se{LossKind::squared_error};
  const Tensor z = Tensor::matrix(2, 1, {1.0, 3.0});
  const Targets y = Targets::values(Tensor::matrix(2, 1, {0.0, 0.0}));
  EXPECT_EQ(terminal_costate(se, z, y, 2), Tensor::matrix(2, 1, {-1.0, -3.0}));
}

TEST(Costate, BackwardSweepCountsAndMatchesFiniteDifferences) {
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const Network net = random_network(rng);
    const LossFunction loss{LossKind::softmax_cross_entropy};
    const Tensor x = random_batch(rng, 3, net.input_dim());
    const Targets y = random_labels(rng, 3, net.output_dim());
    PropCounter counter;
    const Trajectory traj = forward_sweep(net, x, &counter);
    const CostateTrajectory co = backward_sweep(
        net, traj, terminal_costate(loss, traj.output(), y, 3), Regularizer::none(), 3, &counter);
    EXPECT_EQ(counter.totals().full_backward, 1u);
    ASSERT_EQ(co.costates.size(), net.depth() + 1);
    for (std::size_t t = 0; t <= net.depth(); ++t) {
      const Tensor g = fd_state_grad(net, loss, traj.states[t], y, t);
      EXPECT_LT(relative_error(co.at(t), -1.0 * g), 1e-7) << "t=" << t;
    }
  }
}

TEST(Costate, HamiltonianAscentEqualsObjectiveDescent) {
  Rng rng(29);
  const LossFunction loss{LossKind::softmax_cross_entropy};
  for (const Regularizer& reg : {Regularizer::none(), Regularizer::l2(0.05)}) {
    const Network net = random_network(rng);
    const std::size_t b = 4;
    const Tensor x = random_batch(rng, b, net.input_dim());
    const Targets y = random_labels(rng, b, net.output_dim());
    const Trajectory traj = forward_sweep(net, x);
    const CostateTrajectory co =
        backward_sweep(net, traj, terminal_costate(loss, traj.output(), y, b), reg, b);
    const auto ascent = hamiltonian_theta_grad(net, traj, co, reg, b);
    const ObjectiveGradient descent = objective_gradient(net, loss, reg, x, y);
    const double alpha = 0.1;
    for (std::size_t t = 0; t < net.depth(); ++t) {
      Tensor up = net.params(t);
      Tensor down = net.params(t);
      if (up.empty()) continue;
      kernels::axpy(alpha, ascent[t].values(), up.values());
      kernels::axpy(-alpha, descent.theta[t].values(), down.values());
      EXPECT_LE(max_abs_diff(up.values(), down.values()), 1e-12);
    }
  }
}

TEST(Costate, ObjectiveGradientMatchesFiniteDifferences) {
  Rng rng(31);
  const LossFunction loss{LossKind::softmax_cross_entropy};
  const Regularizer reg = Regularizer::l2(0.01);
  const Network net = random_network(rng);
  const Tensor x = random_batch(rng, 3, net.input_dim());
  const Targets y = random_labels(rng, 3, net.output_dim());
  PropCounter counter;
  const ObjectiveGradient g = objective_gradient(net, loss, reg, x, y, &counter);
  EXPECT_EQ(counter.totals().full_forward, 1u);
  EXPECT_EQ(counter.totals().full_backward, 1u);
  EXPECT_NEAR(g.objective, objective_value(net, loss, reg, x, y), 1e-14);
  for (std::size_t t = 0; t < net.depth(); ++t) {
    if (net.params(t).empty()) continue;
    EXPECT_LT(relative_error(g.theta[t], fd_param_grad(net, loss, reg, x, y, t)), 1e-6);
  }
}

TEST(Costate, AdjointIdentityAlongTheTrajectory) {
  // p_{t+1} . (J_x delta) == (J_x^T p_{t+1}) . delta == p_t . delta
  Rng rng(37);
  const LossFunction loss{LossKind::softmax_cross_entropy};
  const Network net = random_network(rng);
  const Tensor x = random_batch(rng, 2, net.input_dim());
  const Targets y = random_labels(rng, 2, net.output_dim());
  const Trajectory traj = forward_sweep(net, x);
  const CostateTrajectory co =
      backward_sweep(net, traj, terminal_costate(loss, traj.output(), y, 2), Regularizer::none(), 2);
  for (std::size_t t = 0; t < net.depth(); ++t) {
    const Tensor delta = random_batch(rng, 2, net.layer(t).in_dim);
    const double lhs = kernels::dot(
        co.at(t + 1).values(), jvp_x(net.layer(t), net.params(t), traj.states[t], delta).values());
    EXPECT_NEAR(lhs, kernels::dot(co.at(t).values(), delta.values()), 1e-12);
  }
}

TEST(Costate, LinearizedSweepErrorIsSecondOrder) {
  Rng rng(41);
  RandomNetSpec spec;
  spec.max_layers = 4;
  const Network net = random_network(rng, spec);
  const Tensor x = random_batch(rng, 2, net.input_dim());
  const Trajectory ref = forward_sweep(net, x);
  const Tensor dir = random_batch(rng, 2, net.input_dim());
  auto error = [&](double h) {
    const Tensor phi0 = x + h * dir;
    const Trajectory lin = linearized_sweep(net, ref, net.params(), phi0);
    const Trajectory exact = forward_sweep(net, phi0);
    return max_abs_diff(lin.output().values(), exact.output().values());
  };
  const double e1 = error(1e-2);
  const double e2 = error(5e-3);
  if (e1 < 1e-13) GTEST_SKIP() << "network is affine along this direction";
  EXPECT_GT(e1 / e2, 3.5);
  EXPECT_LT(e1 / e2, 4.5);
}

TEST(Costate, HamiltonianValueOnAffineLayer) {
  const LayerSpec l = LayerSpec::affine(1, 1);
  const Tensor theta = Tensor::vector({2.0, 1.0});
  const Tensor x = Tensor::vector({3.0});
  const Tensor p = Tensor::vector({0.5});
  EXPECT_DOUBLE_EQ(hamiltonian_value(l, x, p, theta, Regularizer::none(), 1), 3.5);
  EXPECT_DOUBLE_EQ(hamiltonian_value(l, x, p, theta, Regularizer::l2(1.0), 2), 3.5 - 1.25);
}
