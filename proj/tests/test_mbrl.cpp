#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "heatrl/baseline.hpp"
#include "heatrl/errors.hpp"
#include "heatrl/mbrl.hpp"
#include "test_util.hpp"

using namespace heatrl;

namespace {

TransitionSample sample_with(double ti, std::size_t a, double ti_next, double ta = 5.0) {
  return {initial_state(ti, ta, 3), a, initial_state(ti_next, ta, 3), {}, false};
}

// Transitions generated by the true emulator from random states.
SampleMemory emulator_memory(std::size_t count, std::uint64_t seed) {
  SampleMemory mem(4096);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ti(17.0, 24.0), ta(-5.0, 12.0);
  std::uniform_int_distribution<std::size_t> act(0, 5);
  const ActionGrid grid;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = ti(rng), a_t = ta(rng);
    const std::size_t a = act(rng);
    const auto r = step({t, t, 0}, {}, a_t, grid.power(a));
    mem.push({initial_state(t, a_t, 3), a, initial_state(r.state.indoor_temp, a_t, 3), {}, false});
  }
  return mem;
}

struct Context {
  testutil::WindowData data;
  ObservedState observed;
  BuildingState latent;
  DecisionContext ctx;

  Context(std::size_t horizon, double ti)
      : data(horizon, 0.24, 3.0), observed(initial_state(ti, 3.0, 3)), latent{ti, ti, 0} {
    ctx.observed = &observed;
    ctx.true_state = &latent;
    ctx.lookahead = data.window();
  }
};

MbrlConfig small_config() {
  MbrlConfig cfg;
  cfg.horizon = 2;
  cfg.planner.kind = PlannerKind::exhaustive;
  cfg.training.epochs = 5;
  return cfg;
}

}  // namespace

TEST(SampleMemory, FifoEviction) {
  SampleMemory mem(3);
  for (int i = 0; i < 5; ++i) mem.push(sample_with(20.0 + i, 0, 20.0));
  ASSERT_EQ(mem.size(), 3u);
  EXPECT_EQ(mem[0].s.indoor_now(), 22.0);
  EXPECT_EQ(mem[2].s.indoor_now(), 24.0);
}

TEST(Exploration, ScheduleValues) {
  const ExplorationSchedule e;
  EXPECT_DOUBLE_EQ(e.epsilon(1), 0.5);
  EXPECT_NEAR(e.epsilon(10), 0.5 / std::pow(10.0, 0.7), 1e-15);
  double prev = 1.0;
  for (int d = 1; d <= 200; ++d) {
    EXPECT_LE(e.epsilon(d), prev);
    prev = e.epsilon(d);
  }
  EXPECT_THROW(e.epsilon(0), DomainError);
  EXPECT_THROW((ExplorationSchedule{0.0, 0.7}.validate()), DomainError);
  EXPECT_THROW((ExplorationSchedule{0.5, 0.0}.validate()), DomainError);
}

TEST(TransitionTraining, EmptyMemorySkips) {
  LearnedTransitionModel model(nn::MlpSpec::make({6, 8, 1}, nn::Activation::tanh, 0), ActionGrid{});
  nn::Optimizer opt({}, model.network().parameter_count());
  const std::vector<double> before(model.network().parameters().begin(), model.network().parameters().end());
  const auto out = train_transition_model(SampleMemory(10), model, opt, {}, 0);
  EXPECT_FALSE(out.trained);
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(model.network().parameters()[i], before[i]);
}

TEST(TransitionTraining, ConstantTrajectoryHasZeroError) {
  SampleMemory mem(100);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> t(18.0, 23.0);
  for (int i = 0; i < 60; ++i) {
    const double x = t(rng);
    mem.push(sample_with(x, static_cast<std::size_t>(i % 6), x));
  }
  LearnedTransitionModel model(nn::MlpSpec::make({6, 16, 1}, nn::Activation::tanh, 1), ActionGrid{});
  nn::Optimizer opt({}, model.network().parameter_count());
  const auto out = train_transition_model(mem, model, opt, {}, 0);
  ASSERT_TRUE(out.trained);
  EXPECT_LT(out.holdout_mae, 1e-4);
}

TEST(TransitionTraining, LearnsEmulatorDynamics) {
  const auto mem = emulator_memory(400, 3);
  LearnedTransitionModel model(nn::MlpSpec::make({6, 32, 32, 1}, nn::Activation::tanh, 3), ActionGrid{});
  nn::Optimizer opt({}, model.network().parameter_count());
  TransitionTrainingConfig cfg;
  cfg.epochs = 1;
  const double first = train_transition_model(mem, model, opt, cfg, 0).holdout_mae;
  cfg.epochs = 200;
  const double later = train_transition_model(mem, model, opt, cfg, 0).holdout_mae;
  EXPECT_LT(later, 0.5 * first);
  EXPECT_LT(later, 0.2);
}

TEST(TransitionTraining, Deterministic) {
  const auto mem = emulator_memory(100, 4);
  auto run = [&] {
    LearnedTransitionModel model(nn::MlpSpec::make({6, 16, 1}, nn::Activation::tanh, 5), ActionGrid{});
    nn::Optimizer opt({}, model.network().parameter_count());
    return train_transition_model(mem, model, opt, {}, 7).holdout_mae;
  };
  EXPECT_EQ(run(), run());
}

TEST(MbrlAgent, FullExplorationIsUniform) {
  auto cfg = small_config();
  cfg.epsilon_override = 1.0;
  MbrlAgent agent(cfg, ActionGrid{}, 4);
  Context c(2, 21.0);
  std::vector<double> counts(6, 0.0);
  const int n = 6000;
  for (int h = 0; h < n; ++h) {
    c.ctx.hour = h;
    counts[agent.act(c.ctx)] += 1.0;
  }
  EXPECT_GT(testutil::chi_square_p(counts, std::vector<double>(6, n / 6.0)), 0.01);
}

TEST(MbrlAgent, NoExplorationFollowsPlan) {
  auto cfg = small_config();
  cfg.epsilon_override = 0.0;
  MbrlAgent agent(cfg, ActionGrid{}, 4);
  Context c(2, 21.0);
  const auto a0 = agent.act(c.ctx);
  ASSERT_EQ(agent.current_plan().actions.size(), 2u);
  EXPECT_EQ(a0, agent.current_plan().actions[0]);
  EXPECT_EQ(agent.act(c.ctx), agent.current_plan().actions[1]);
  // past the end of a short plan the last action is held
  EXPECT_EQ(agent.act(c.ctx), agent.current_plan().actions[1]);
  EXPECT_EQ(agent.day(), 1);
}

TEST(MbrlAgent, DailyUpdateTrainsAndRecordsMae) {
  auto cfg = small_config();
  MbrlAgent agent(cfg, ActionGrid{}, 4);
  const auto mem = emulator_memory(48, 6);
  for (const auto& s : mem.samples()) agent.observe(s);
  Context c(2, 21.0);
  agent.daily_update(c.ctx);
  EXPECT_TRUE(agent.mae_history().empty());  // the first day only plans
  agent.daily_update(c.ctx);
  ASSERT_EQ(agent.mae_history().size(), 1u);
  EXPECT_EQ(agent.mae_history()[0].day, 2);
  EXPECT_TRUE(agent.last_training().trained);
}

TEST(MbrlAgent, DeterministicForSeed) {
  auto run = [] {
    auto cfg = small_config();
    cfg.seed = 3;
    MbrlAgent agent(cfg, ActionGrid{}, 4);
    const auto mem = emulator_memory(60, 8);
    for (const auto& s : mem.samples()) agent.observe(s);
    Context c(2, 20.0);
    std::vector<std::size_t> acts;
    for (int h = 0; h < 48; ++h) acts.push_back(agent.act(c.ctx));
    return std::make_pair(acts, agent.mae_history().front().holdout_mae);
  };
  EXPECT_EQ(run(), run());
}

TEST(MbrlAgent, InjectedExactModelPlansLikeMpc) {
  auto cfg = small_config();
  cfg.horizon = 3;
  auto model = std::make_shared<EmulatorModel>(BuildingParams{}, ActionGrid{});
  MbrlAgent agent(cfg, ActionGrid{}, model);
  std::mt19937_64 rng(12);
  for (int i = 0; i < 5; ++i) {
    auto inst = testutil::random_instance(rng, 3);
    DecisionContext ctx;
    ctx.observed = &inst.start.observed;
    ctx.true_state = &inst.start.latent;
    ctx.lookahead = inst.data.window();
    agent.daily_update(ctx);
    Plan mpc;
    mpc_action(*model, inst.start.observed, inst.start.latent, inst.data.window(), 3, cfg.planner, 0, {}, &mpc);
    EXPECT_EQ(agent.current_plan().actions, mpc.actions);
    EXPECT_NEAR(agent.current_plan().expected_return, mpc.expected_return, 1e-12);
  }
  EXPECT_EQ(agent.learned_model(), nullptr);
}

TEST(MaeCsv, Header) {
  const auto dir = testutil::temp_dir("mae_csv");
  write_mae_csv({{2, 0.5}, {3, 0.25}}, dir / "mae.csv");
  std::ifstream in(dir / "mae.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "day,holdout_mae_c");
}
