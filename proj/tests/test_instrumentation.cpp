#include <gtest/gtest.h>

#include "yopo/instrumentation.hpp"
#include "yopo/rng.hpp"
#include "yopo/training.hpp"

using namespace yopo;

namespace {

TrainConfig with(Method method, std::optional<std::size_t> m, std::optional<std::size_t> n,
                 std::optional<std::size_t> r) {
  TrainConfig c;
  c.method = method;
  c.m = m;
  c.n = n;
  c.r = r;
  return c;
}

}  // namespace

TEST(Counts, ClosedForms) {
  EXPECT_EQ(expected_counts(with(Method::natural, {}, {}, {}), 10).full_forward, 10u);
  EXPECT_EQ(expected_counts(with(Method::pgd, {}, {}, 5), 10).full_forward, 60u);
  const PropCounts y = expected_counts(with(Method::yopo, 5, 3, {}), 10);
  EXPECT_EQ(y.full_forward, 60u);
  EXPECT_EQ(y.full_backward, 60u);
  EXPECT_EQ(y.first_layer_forward, 150u);
  const PropCounts f = expected_counts(with(Method::free, 4, {}, {}), 2);
  EXPECT_EQ(f.full_forward, 10u);
  EXPECT_EQ(f.first_layer_forward, 8u);
  EXPECT_EQ(expected_counts(with(Method::trades, {}, {}, 3), 1).full_forward, 4u);
}

TEST(Counter, MinibatchWindowAndDisjointCategories) {
  PropCounter c;
  c.add_full_forward();
  c.begin_minibatch();
  c.add_first_layer_forward();
  c.add_first_layer_backward();
  EXPECT_EQ(c.minibatch().full_forward, 0u);
  EXPECT_EQ(c.minibatch().first_layer_forward, 1u);
  EXPECT_EQ(c.totals().full_forward, 1u);
  {
    PhaseTimer t(&c, Phase::attack);
  }
  EXPECT_GE(c.wall_ms(Phase::attack), 0.0);
  EXPECT_STREQ(phase_name(Phase::weight_update), "weight_update");
}

TEST(Counter, AuditReportsMismatch) {
  PropCounter c;
  c.add_full_forward();
  const CountAudit a = count_report(c, with(Method::natural, {}, {}, {}), 2);
  EXPECT_FALSE(a.pass());
  bool found = false;
  for (const CategoryAudit& cat : a.categories) {
    if (cat.category == "full_forward") {
      found = true;
      EXPECT_EQ(cat.expected, 2u);
      EXPECT_EQ(cat.observed, 1u);
    }
  }
  EXPECT_TRUE(found);
}

TEST(Counter, RandomizedTrainerAudit) {
  SyntheticSpec s;
  s.dim = 3;
  s.examples = 200;
  const Dataset data = gen_synthetic(s);
  Rng rng(77);
  const Method methods[] = {Method::natural, Method::pgd,    Method::yopo,
                            Method::free,    Method::trades, Method::trades_yopo};
  for (int trial = 0; trial < 24; ++trial) {
    const Method method = methods[trial % 6];
    const std::size_t m = 1 + rng.index(8), n = 1 + rng.index(8), r = 1 + rng.index(8);
    const std::size_t minibatches = 1 + rng.index(20);
    TrainConfig c;
    c.method = method;
    if (method == Method::pgd || method == Method::trades) c.r = r;
    if (method == Method::yopo || method == Method::trades_yopo || method == Method::free) c.m = m;
    if (method == Method::yopo || method == Method::trades_yopo) c.n = n;
    c.batch_size = (data.size() + minibatches - 1) / minibatches;
    c.epochs = 1;
    c.seed = trial;
    Rng init(trial);
    const std::vector<std::size_t> dims{3, 4, 2};
    TrainOptions o;
    o.eval_each_epoch = false;
    const TrainResult res = train(c, data, make_mlp(dims, Activation::tanh, init), o);
    const std::uint64_t mb = (data.size() + c.batch_size - 1) / c.batch_size;
    ASSERT_EQ(res.report.minibatches, mb);
    EXPECT_EQ(res.report.counts, expected_counts(c, mb)) << method_name(method);
    EXPECT_TRUE(res.report.audit.pass());
  }
}
