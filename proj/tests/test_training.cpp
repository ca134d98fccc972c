#include <gtest/gtest.h>

#include <sstream>

#include "yopo/error.hpp"
#include "yopo/training.hpp"

using namespace yopo;

namespace {

Dataset small_data(std::size_t examples = 64, std::uint64_t seed = 3) {
  SyntheticSpec s;
  s.dim = 4;
  s.examples = examples;
  s.margin = 2;
  s.noise = 0.6;
  s.seed = seed;
  return gen_synthetic(s);
}

Network small_net(std::uint64_t seed = 1) {
  Rng rng(seed);
  const std::vector<std::size_t> dims{4, 8, 8, 2};
  return make_mlp(dims, Activation::tanh, rng);
}

TrainConfig base(Method m) {
  TrainConfig c;
  c.method = m;
  c.batch_size = 16;
  c.epochs = 2;
  c.lr = 0.05;
  c.epsilon = 0.1;
  c.attack_step = 0.03;
  c.seed = 11;
  return c;
}

TrainOptions quiet() {
  TrainOptions o;
  o.eval_each_epoch = false;
  return o;
}

double max_param_diff(const Network& a, const Network& b) {
  double d = 0;
  for (std::size_t t = 0; t < a.depth(); ++t) {
    if (!a.params(t).empty()) d = std::max(d, max_abs_diff(a.params(t).values(), b.params(t).values()));
  }
  return d;
}

}  // namespace

TEST(Sgd, MomentumRecursion) {
  Tensor theta = Tensor::vector({1.0, 2.0});
  Tensor v = zeros_like(theta);
  const Tensor g = Tensor::vector({0.5, -1.0});
  sgd_update(theta, g, 1.0, 0.9, 0.0, v);
  sgd_update(theta, g, 1.0, 0.9, 0.0, v);
  EXPECT_NEAR(theta[0], 1.0 - 0.5 - 1.9 * 0.5, 1e-15);
  EXPECT_NEAR(theta[1], 2.0 + 1.0 + 1.9 * 1.0, 1e-15);
}

TEST(Sgd, WeightDecayAndEmptyLayers) {
  std::vector<Tensor> theta{Tensor::vector({2.0}), Tensor()};
  const std::vector<Tensor> g{Tensor::vector({0.0}), Tensor()};
  SgdState state;
  sgd_update(theta, g, 0.5, 0.0, 0.1, state);
  EXPECT_DOUBLE_EQ(theta[0][0], 2.0 - 0.5 * 0.2);
  EXPECT_TRUE(theta[1].empty());
}

TEST(Config, LrScheduleIsPiecewiseConstant) {
  TrainConfig c = base(Method::natural);
  c.lr = 0.1;
  c.lr_schedule = {{2, 0.1}, {4, 0.5}};
  EXPECT_DOUBLE_EQ(c.lr_at(0), 0.1);
  EXPECT_DOUBLE_EQ(c.lr_at(2), 0.1 * 0.1);
  EXPECT_DOUBLE_EQ(c.lr_at(5), 0.1 * 0.1 * 0.5);
}

TEST(Config, ErrorsNameTheField) {
  TrainConfig c = base(Method::pgd);
  c.r = 5;
  c.n = 3;
  try {
    c.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "n");
  }
  c = base(Method::yopo);
  c.m = 5;
  try {
    c.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "n");
  }
  c = base(Method::natural);
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = base(Method::natural);
  c.epsilon = -1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = base(Method::pgd);
  c.r = 1;
  c.delayed_update = true;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, JsonRoundTrip) {
  TrainConfig c = base(Method::yopo);
  c.m = 3;
  c.n = 2;
  c.lr_schedule = {{1, 0.5}};
  c.delayed_update = false;
  EXPECT_EQ(train_config_from_json(nlohmann::json::parse(to_json(c).dump())), c);
  auto j = to_json(c);
  j["bogus"] = 1;
  EXPECT_THROW(train_config_from_json(j), ConfigError);
}

TEST(Config, MethodDefaults) {
  TrainConfig c = base(Method::yopo);
  c.m = 2;
  c.n = 4;
  EXPECT_TRUE(c.delayed());
  EXPECT_EQ(c.inner_steps(), 4u);
  c = base(Method::free);
  c.m = 2;
  EXPECT_FALSE(c.delayed());
  EXPECT_EQ(c.inner_steps(), 1u);
  EXPECT_EQ(parse_method(method_name(Method::trades_yopo)), Method::trades_yopo);
}

TEST(Train, YopoCountsOnFourMinibatches) {
  TrainConfig c = base(Method::yopo);
  c.m = 5;
  c.n = 3;
  c.epochs = 1;
  const TrainResult r = train(c, small_data(64), small_net(), quiet());
  EXPECT_EQ(r.report.minibatches, 4u);
  EXPECT_EQ(r.report.counts.full_forward, 24u);
  EXPECT_EQ(r.report.counts.first_layer_forward, 60u);
  EXPECT_EQ(r.report.counts.first_layer_backward, 60u);
  EXPECT_EQ(r.report.adversary_updates, 4u * 15u);
  EXPECT_TRUE(r.report.audit.pass());
}

TEST(Train, FreeMatchesYopoWithOneInnerStep) {
  TrainConfig f = base(Method::free);
  f.m = 3;
  f.epochs = 3;
  TrainConfig y = base(Method::yopo);
  y.m = 3;
  y.n = 1;
  y.epochs = 3;
  y.delayed_update = false;
  const Dataset d = small_data();
  const TrainResult a = train(f, d, small_net(), quiet());
  const TrainResult b = train(y, d, small_net(), quiet());
  EXPECT_LE(max_param_diff(a.network, b.network), 1e-12);
}

TEST(Train, EmptyBallCollapsesToNatural) {
  const Dataset d = small_data();
  const TrainResult nat = train(base(Method::natural), d, small_net(), quiet());
  TrainConfig p = base(Method::pgd);
  p.r = 3;
  p.epsilon = 0;
  TrainConfig y = base(Method::yopo);
  y.m = 1;
  y.n = 4;
  y.epsilon = 0;
  EXPECT_EQ(train(p, d, small_net(), quiet()).network.params(), nat.network.params());
  EXPECT_EQ(train(y, d, small_net(), quiet()).network.params(), nat.network.params());
}

TEST(Train, RepeatedRunsAreIdentical) {
  TrainConfig c = base(Method::trades_yopo);
  c.m = 2;
  c.n = 2;
  const Dataset d = small_data();
  const TrainResult a = train(c, d, small_net());
  const TrainResult b = train(c, d, small_net());
  EXPECT_EQ(a.network.params(), b.network.params());
  auto ja = to_json(a.report), jb = to_json(b.report);
  ja.erase("timing");
  jb.erase("timing");
  EXPECT_EQ(ja.dump(), jb.dump());
  std::ostringstream ca, cb;
  write_metrics_csv(ca, a.report);
  write_metrics_csv(cb, b.report);
  EXPECT_EQ(ca.str(), cb.str());
  EXPECT_EQ(ca.str().rfind("# config: ", 0), 0u);
}

TEST(Train, EveryMethodPassesTheAudit) {
  const Dataset d = small_data(40);
  for (Method m : {Method::natural, Method::pgd, Method::yopo, Method::free, Method::trades,
                   Method::trades_yopo}) {
    TrainConfig c = base(m);
    c.epochs = 1;
    if (m == Method::pgd || m == Method::trades) c.r = 2;
    if (m == Method::yopo || m == Method::trades_yopo || m == Method::free) c.m = 2;
    if (m == Method::yopo || m == Method::trades_yopo) c.n = 3;
    const TrainResult r = train(c, d, small_net(), quiet());
    EXPECT_TRUE(r.report.audit.pass()) << method_name(m);
    EXPECT_EQ(r.report.counts, expected_counts(c, r.report.minibatches)) << method_name(m);
  }
}

TEST(Train, PerEpochMetricsAreCumulative) {
  TrainConfig c = base(Method::pgd);
  c.r = 2;
  c.epochs = 3;
  const TrainResult r = train(c, small_data(), small_net());
  ASSERT_EQ(r.report.epochs.size(), 3u);
  EXPECT_EQ(r.report.epochs[2].full_props, 3u * 4u * 3u);
  for (const EpochMetrics& e : r.report.epochs) {
    EXPECT_LE(e.robust_acc, e.clean_acc);
    EXPECT_EQ(e.wall_ms, 0.0);
  }
}

TEST(Train, RejectsMismatchedNetwork) {
  Rng rng(1);
  const std::vector<std::size_t> dims{3, 4, 2};
  EXPECT_ANY_THROW(train(base(Method::natural), small_data(), make_mlp(dims, Activation::tanh, rng)));
}

TEST(Evaluate, NoAttackAndEmptyBallMatchClean) {
  const Dataset d = small_data();
  const Network net = small_net();
  const LossFunction loss{};
  const Accuracy none = evaluate(net, loss, d, std::nullopt, 1);
  EXPECT_EQ(none.robust, none.clean);
  const Accuracy zero = evaluate(net, loss, d, default_eval_attack(0.0), 1);
  EXPECT_EQ(zero.robust, zero.clean);
  const Accuracy att = evaluate(net, loss, d, default_eval_attack(0.5), 1);
  EXPECT_LE(att.robust, att.clean);
  EXPECT_EQ(default_eval_attack(0.4).steps, 20u);
  EXPECT_DOUBLE_EQ(default_eval_attack(0.4).step_size, 0.1);
}
