#include <gtest/gtest.h>

#include <algorithm>

#include "heatrl/baseline.hpp"
#include "heatrl/errors.hpp"
#include "heatrl/harness.hpp"
#include "test_util.hpp"

using namespace heatrl;

namespace {

const EmulatorModel kModel{BuildingParams{}, ActionGrid{}};

PlannerConfig exhaustive() {
  PlannerConfig p;
  p.kind = PlannerKind::exhaustive;
  return p;
}

// Largest drop below t_min under RBC with zero hysteresis over a 30-day
// default season; the reference run measured 1.597 °C.
constexpr double kRbcUndershootBound = 1.60;

}  // namespace

TEST(Rbc, ThresholdExamples) {
  const ActionGrid g;
  const ComfortBand b;
  const RbcConfig c;
  EXPECT_EQ(rbc_action(18.4, b, c, g), 5u);
  EXPECT_EQ(rbc_action(18.6, b, c, g), 0u);
  EXPECT_EQ(rbc_action(25.0, b, c, g), 0u);
  EXPECT_THROW(rbc_action(NAN, b, c, g), DomainError);
  EXPECT_THROW((RbcConfig{-0.1}.validate()), DomainError);
}

TEST(Rbc, OnlyOffOrFullPower) {
  const ActionGrid g;
  for (double t = 10.0; t <= 30.0; t += 0.05) {
    const auto a = rbc_action(t, {}, {}, g);
    EXPECT_TRUE(a == 0 || a == g.max_index());
  }
}

TEST(Rbc, ZeroHysteresisUndershootRegression) {
  Scenario s;
  s.days = 30;
  s.rbc.hysteresis = 0.0;
  const auto traces = make_traces(s);
  RbcController rbc(s.rbc, s.grid);
  const auto res = simulate(s, traces, rbc);
  double worst = 0.0;
  for (const auto& r : res.log.controlled()) worst = std::max(worst, s.bands[0].band.t_min - r.t_i);
  RecordProperty("undershoot", std::to_string(worst));
  EXPECT_LE(worst, kRbcUndershootBound + 1e-9);
}

TEST(Mpc, WarmBuildingMildWeatherIdles) {
  const testutil::WindowData w(3, 0.24, 15.0);
  const auto obs = initial_state(22.0, 15.0, 3);
  EXPECT_EQ(mpc_action(kModel, obs, {22.0, 22.0, 0}, w.window(), 3, exhaustive(), 0), 0u);
  EXPECT_EQ(mpc_action(kModel, obs, {22.0, 22.0, 0}, w.window(), 3, PlannerConfig{}, 0), 0u);
}

TEST(Mpc, HorizonOneColdStartForcesFullPower) {
  const testutil::WindowData w(1, 0.28, -10.0);
  const auto obs = initial_state(15.0, 15.0, 3);
  EXPECT_EQ(mpc_action(kModel, obs, {15.0, 15.0, 0}, w.window(), 1, PlannerConfig{}, 0), 5u);
}

TEST(Mpc, PreheatsBeforeExpensiveBlock) {
  testutil::WindowData cheap_then_dear(4, 0.28, 0.0);
  cheap_then_dear.prices[0] = 0.20;
  const testutil::WindowData flat(4, 0.28, 0.0);
  const BuildingState latent{19.3, 19.3, 0};
  const auto obs = initial_state(19.3, 0.0, 3);
  Plan tou, ref;
  mpc_action(kModel, obs, latent, cheap_then_dear.window(), 4, exhaustive(), 0, {}, &tou);
  mpc_action(kModel, obs, latent, flat.window(), 4, exhaustive(), 0, {}, &ref);
  EXPECT_GT(tou.actions[0], ref.actions[0]);
}

TEST(Mpc, ControllerWarmStartsAndIsDeterministic) {
  Scenario s;
  s.days = 2;
  s.mpc.horizon = 6;
  const auto traces = make_traces(s);
  MpcController a(EmulatorModel(s.building, s.grid), s.mpc);
  MpcController b(EmulatorModel(s.building, s.grid), s.mpc);
  const auto ra = simulate(s, traces, a);
  const auto rb = simulate(s, traces, b);
  EXPECT_EQ(episode_log_csv(ra.log), episode_log_csv(rb.log));
  EXPECT_EQ(a.last_plan().actions.size(), 6u);
}

TEST(Mpc, CheaperThanRbcOverAWeek) {
  Scenario s;
  s.days = 7;
  s.agent = AgentKind::mpc;
  const auto rep = run_scenario(s);
  double mpc_total = 0.0, rbc_total = 0.0;
  for (const auto& r : rep.agent_log.controlled()) mpc_total += r.r_cons + r.r_comfort;
  for (const auto& r : rep.baseline_log.controlled()) rbc_total += r.r_cons + r.r_comfort;
  EXPECT_GE(mpc_total, rbc_total);
  EXPECT_LE(rep.metrics.cost_change_pct, 0.0);
  EXPECT_LE(rep.metrics.comfort_loss_eur, 1e-9);
}
