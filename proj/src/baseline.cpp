#include "heatrl/baseline.hpp"

#include <algorithm>
#include <cmath>

#include "heatrl/errors.hpp"

namespace heatrl {

void RbcConfig::validate() const {
  if (!(hysteresis >= 0.0)) throw DomainError("RBC hysteresis must be >= 0");
}

std::size_t rbc_action(double t_i, const ComfortBand& band, const RbcConfig& cfg,
                       const ActionGrid& grid) {
  if (!std::isfinite(t_i)) throw DomainError("non-finite indoor temperature");
  return t_i < band.t_min - cfg.hysteresis ? grid.max_index() : 0;
}

RbcController::RbcController(RbcConfig cfg, ActionGrid grid) : cfg_(cfg), grid_(std::move(grid)) {
  cfg_.validate();
}

std::size_t RbcController::act(const DecisionContext& ctx) {
  return rbc_action(ctx.observed->indoor_now(), ctx.lookahead.bands[0], cfg_, grid_);
}

std::size_t mpc_action(const EmulatorModel& model, const ObservedState& observed,
                       const BuildingState& latent, const PlanningWindow& window,
                       std::size_t horizon, const PlannerConfig& planner, std::uint64_t seed,
                       std::span<const std::size_t> warm_start, Plan* plan_out) {
  const std::size_t h = std::min(horizon, window.covered());
  if (h == 0) throw DomainError("MPC lookahead is empty");
  if (warm_start.size() != h) warm_start = {};
  ModelState start{observed, latent, 0.0};
  Plan p = plan(model, start, h, window, planner, seed, warm_start);
  const std::size_t first = p.actions.front();
  if (plan_out) *plan_out = std::move(p);
  return first;
}

MpcController::MpcController(EmulatorModel model, MpcConfig cfg)
    : model_(std::move(model)), cfg_(cfg) {}

std::size_t MpcController::act(const DecisionContext& ctx) {
  std::vector<std::size_t> warm;
  if (cfg_.warm_start && last_plan_.actions.size() > 1) {
    warm.assign(last_plan_.actions.begin() + 1, last_plan_.actions.end());
    warm.push_back(warm.back());
  }
  const std::uint64_t seed = cfg_.seed * 1000003ULL + static_cast<std::uint64_t>(ctx.hour);
  return mpc_action(model_, *ctx.observed, *ctx.true_state, ctx.lookahead, cfg_.horizon,
                    cfg_.planner, seed, warm, &last_plan_);
}

}  // namespace heatrl
