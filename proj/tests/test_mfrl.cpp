#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "heatrl/errors.hpp"
#include "heatrl/mfrl.hpp"
#include "test_util.hpp"

using namespace heatrl;

namespace {

// Linear 1-input, 2-output network whose outputs are its biases.
nn::Mlp constant_net(double q0, double q1) {
  nn::Mlp net(nn::MlpSpec::make({1, 2}, nn::Activation::relu, 0));
  for (double& p : net.parameters()) p = 0.0;
  net.bias(0, 0) = q0;
  net.bias(0, 1) = q1;
  return net;
}

QPair pair_with(double q0, double q1, double t0, double t1, double gamma) {
  QPair p(constant_net(q0, q1), 0.01, gamma);
  p.target = constant_net(t0, t1);
  return p;
}

TransitionSample toy(double ti, std::size_t a, double reward) {
  return {initial_state(ti, 5.0, 3), a, initial_state(ti - 0.1, 5.0, 3), {reward, 0.0}, false};
}

}  // namespace

TEST(SumTree, TotalsAndLookup) {
  SumTree t(5);
  const std::vector<double> w{1.0, 0.0, 2.0, 3.0, 0.5};
  for (std::size_t i = 0; i < w.size(); ++i) t.set(i, w[i]);
  EXPECT_DOUBLE_EQ(t.total(), 6.5);
  EXPECT_EQ(t.find(0.0), 0u);
  EXPECT_EQ(t.find(0.99), 0u);
  EXPECT_EQ(t.find(1.0), 2u);
  EXPECT_EQ(t.find(3.5), 3u);
  EXPECT_EQ(t.find(6.4), 4u);
  t.set(3, 0.0);
  EXPECT_DOUBLE_EQ(t.total(), 3.5);
}

TEST(Priority, Examples) {
  EXPECT_NEAR(compute_priority(1.5, 1.0, 1e-3), 0.501, 1e-15);
  EXPECT_EQ(compute_priority(-2.0, -2.0, 1e-3), 1e-3);
  EXPECT_NEAR(compute_priority(-1.0, 2.0, 0.01), 3.01, 1e-15);
}

TEST(Replay, SamplingFollowsPriorities) {
  PrioritizedReplay r(4, 1.0, 1e-3);
  r.push(toy(20, 0, 0), 3.0);
  r.push(toy(21, 0, 0), 1.0);
  EXPECT_DOUBLE_EQ(r.probability(0), 0.75);
  std::mt19937_64 rng(1);
  std::vector<double> counts(2, 0.0);
  const int n = 8000;
  for (int i = 0; i < n; ++i) counts[r.sample(1, rng)[0]] += 1.0;
  EXPECT_GT(testutil::chi_square_p(counts, {0.75 * n, 0.25 * n}), 0.01);
}

TEST(Replay, ZeroAlphaIsUniform) {
  PrioritizedReplay r(4, 0.0, 1e-3);
  for (int i = 0; i < 4; ++i) r.push(toy(20 + i, 0, 0), 1.0 + 10.0 * i);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(r.probability(i), 0.25);
  std::mt19937_64 rng(2);
  std::vector<double> counts(4, 0.0);
  for (int i = 0; i < 8000; ++i) counts[r.sample(1, rng)[0]] += 1.0;
  EXPECT_GT(testutil::chi_square_p(counts, std::vector<double>(4, 2000.0)), 0.01);
}

TEST(Replay, FullBatchReturnsEverySlot) {
  PrioritizedReplay r(8, 0.6, 1e-3);
  for (int i = 0; i < 5; ++i) r.push(toy(20 + i, 0, 0), 0.1 * (i + 1));
  std::mt19937_64 rng(3);
  auto slots = r.sample(5, rng);
  std::sort(slots.begin(), slots.end());
  EXPECT_EQ(slots, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  EXPECT_THROW(r.sample(6, rng), DomainError);
}

TEST(Replay, FifoAndOffsetFloor) {
  PrioritizedReplay r(2, 0.6, 0.05);
  r.push(toy(20, 0, 0), 0.0);
  EXPECT_EQ(r.priority(0), 0.05);
  r.push(toy(21, 0, 0), 1.0);
  EXPECT_EQ(r.push(toy(22, 0, 0), 1.0), 0u);
  EXPECT_EQ(r[0].s.indoor_now(), 22.0);
  EXPECT_EQ(r.size(), 2u);
  double sum = 0.0;
  for (std::size_t i = 0; i < 2; ++i) sum += std::pow(r.priority(i), 0.6);
  EXPECT_NEAR(r.weight_sum(), sum, 1e-12);
}

TEST(QTarget, TerminalAndZeroDiscount) {
  const auto p = pair_with(1, 2, 10, 0, 0.9);
  const std::vector<double> x{0.0};
  EXPECT_EQ(q_target(-5.4, true, x, p), -5.4);
  const auto p0 = pair_with(1, 2, 10, 0, 0.0);
  EXPECT_EQ(q_target(-0.3, false, x, p0), -0.3);
}

TEST(QTarget, DoubleQDecouplesSelection) {
  const auto p = pair_with(1, 2, 10, 0, 0.9);
  const std::vector<double> x{0.0};
  EXPECT_NEAR(q_target(0.0, false, x, p, TargetRule::double_q), 0.0, 1e-15);
  EXPECT_NEAR(q_target(0.0, false, x, p, TargetRule::target_argmax), 9.0, 1e-12);
}

TEST(SoftUpdate, Extremes) {
  std::mt19937_64 rng(4);
  QPair p(nn::Mlp(nn::MlpSpec::make({3, 4, 2}, nn::Activation::relu, 1)), 1.0, 0.9);
  p.target = nn::Mlp(nn::MlpSpec::make({3, 4, 2}, nn::Activation::relu, 2));
  const std::vector<double> target_before(p.target.parameters().begin(), p.target.parameters().end());
  p.tau = 0.0;
  soft_update(p);
  for (std::size_t i = 0; i < target_before.size(); ++i) EXPECT_EQ(p.target.parameters()[i], target_before[i]);
  p.tau = 1.0;
  soft_update(p);
  for (std::size_t i = 0; i < target_before.size(); ++i)
    EXPECT_EQ(p.target.parameters()[i], p.online.parameters()[i]);
  p.tau = 0.3;
  soft_update(p);  // equal weights stay equal
  for (std::size_t i = 0; i < target_before.size(); ++i)
    EXPECT_NEAR(p.target.parameters()[i], p.online.parameters()[i], 1e-15);
}

TEST(SoftUpdate, LagShrinksGeometrically) {
  QPair p(nn::Mlp(nn::MlpSpec::make({3, 4, 2}, nn::Activation::relu, 1)), 0.05, 0.9);
  p.target = nn::Mlp(nn::MlpSpec::make({3, 4, 2}, nn::Activation::relu, 2));
  for (int k = 0; k < 10; ++k) {
    std::vector<double> lag;
    for (std::size_t i = 0; i < p.online.parameter_count(); ++i)
      lag.push_back(p.target.parameters()[i] - p.online.parameters()[i]);
    soft_update(p);
    for (std::size_t i = 0; i < lag.size(); ++i)
      EXPECT_NEAR(p.target.parameters()[i] - p.online.parameters()[i], 0.95 * lag[i], 1e-12);
  }
}

TEST(Argmax, LowestIndexOnTies) {
  const std::vector<double> q{0, 1, 5, 2, 2, 1};
  EXPECT_EQ(argmax_lowest(q), 2u);
  const std::vector<double> flat(6, 0.5);
  EXPECT_EQ(argmax_lowest(flat), 0u);
  const std::vector<double> tie{1, 3, 3};
  EXPECT_EQ(argmax_lowest(tie), 1u);
  EXPECT_THROW(argmax_lowest(std::vector<double>{}), DomainError);
}

TEST(MfrlAgent, GreedyAndUniformSelection) {
  MfrlConfig cfg;
  MfrlAgent agent(cfg, ActionGrid{}, 5);
  const auto s = initial_state(20.0, 3.0, 3);
  const auto greedy = argmax_lowest(agent.q_values(s));
  for (int i = 0; i < 50; ++i) EXPECT_EQ(agent.select_action(s, 0.0), greedy);
  std::vector<double> counts(6, 0.0);
  for (int i = 0; i < 6000; ++i) counts[agent.select_action(s, 1.0)] += 1.0;
  EXPECT_GT(testutil::chi_square_p(counts, std::vector<double>(6, 1000.0)), 0.01);
}

TEST(MfrlAgent, EpsilonUsesControlledDay) {
  MfrlConfig cfg;
  MfrlAgent agent(cfg, ActionGrid{}, 5);
  EXPECT_DOUBLE_EQ(agent.epsilon(0), 0.5);
  EXPECT_DOUBLE_EQ(agent.epsilon(23), 0.5);
  EXPECT_NEAR(agent.epsilon(24), 0.5 / std::pow(2.0, 0.7), 1e-15);
}

TEST(MfrlAgent, NoTrainingBeforeWarmup) {
  MfrlConfig cfg;
  cfg.warmup = 10;
  cfg.batch_size = 8;
  cfg.train_every = 1;
  MfrlAgent agent(cfg, ActionGrid{}, 5);
  const std::vector<double> before(agent.networks().online.parameters().begin(),
                                   agent.networks().online.parameters().end());
  for (int i = 0; i < 9; ++i) agent.observe(toy(20.0 + 0.1 * i, static_cast<std::size_t>(i % 6), -0.1));
  EXPECT_EQ(agent.cycles_trained(), 0u);
  EXPECT_FALSE(agent.train_cycle());
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(agent.networks().online.parameters()[i], before[i]);
  agent.observe(toy(21.5, 1, -0.1));
  EXPECT_EQ(agent.cycles_trained(), 1u);
}

TEST(MfrlAgent, ToyChainMatchesValueIteration) {
  const testutil::ToyMdp mdp;
  for (std::uint64_t seed : {0, 1, 2}) EXPECT_LT(testutil::toy_mdp_error(mdp, seed, 400), 1e-2) << "seed " << seed;
}

TEST(MfrlAgent, QTraceRecordsDecisions) {
  MfrlConfig cfg;
  cfg.record_q_trace = true;
  MfrlAgent agent(cfg, ActionGrid{}, 5);
  testutil::WindowData w(1, 0.24, 3.0);
  const auto obs = initial_state(20.0, 3.0, 3);
  const BuildingState latent{20.0, 20.0, 0};
  DecisionContext ctx{7, 0, &obs, &latent, w.window()};
  const auto a = agent.act(ctx);
  ASSERT_EQ(agent.q_trace().size(), 1u);
  EXPECT_EQ(agent.q_trace()[0].hour, 7);
  EXPECT_EQ(agent.q_trace()[0].chosen, a);
  EXPECT_EQ(agent.q_trace()[0].q.size(), 6u);
}
