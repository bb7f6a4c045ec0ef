#pragma once

#include <vector>

#include "heatrl/controller.hpp"

namespace heatrl {

struct RbcConfig {
  double hysteresis = 0.5;  // °C below t_min before the heat pump starts

  void validate() const;
};

/// Full power when t_i < t_min - hysteresis, otherwise off. Never cools.
std::size_t rbc_action(double t_i, const ComfortBand& band, const RbcConfig& cfg,
                       const ActionGrid& grid);

class RbcController final : public Controller {
 public:
  RbcController(RbcConfig cfg, ActionGrid grid);
  std::string name() const override { return "rbc"; }
  std::size_t act(const DecisionContext& ctx) override;

 private:
  RbcConfig cfg_;
  ActionGrid grid_;
};

struct MpcConfig {
  std::size_t horizon = 24;
  PlannerConfig planner;
  bool warm_start = true;
  std::uint64_t seed = 0;
};

/// Receding-horizon controller planning on the exact emulator from the true
/// latent state. Re-plans every hour and executes the first action.
class MpcController final : public Controller {
 public:
  MpcController(EmulatorModel model, MpcConfig cfg);
  std::string name() const override { return "mpc"; }
  std::size_t act(const DecisionContext& ctx) override;

  const Plan& last_plan() const { return last_plan_; }

 private:
  EmulatorModel model_;
  MpcConfig cfg_;
  Plan last_plan_;
};

/// One MPC decision without controller state: plans from (observed, latent)
/// and returns the first action.
std::size_t mpc_action(const EmulatorModel& model, const ObservedState& observed,
                       const BuildingState& latent, const PlanningWindow& window,
                       std::size_t horizon, const PlannerConfig& planner, std::uint64_t seed,
                       std::span<const std::size_t> warm_start = {}, Plan* plan_out = nullptr);

}  // namespace heatrl
