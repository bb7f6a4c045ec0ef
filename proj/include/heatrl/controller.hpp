#pragma once

#include <cstdint>
#include <string>

#include "heatrl/emulator.hpp"
#include "heatrl/mdp.hpp"
#include "heatrl/planners.hpp"

namespace heatrl {

/// Everything a controller may look at when choosing the action for `hour`.
/// `true_state` is the emulator's latent state; only perfect-information
/// controllers read it.
struct DecisionContext {
  std::int64_t hour = 0;
  std::int64_t controlled_hour = 0;  // hours since control started
  const ObservedState* observed = nullptr;
  const BuildingState* true_state = nullptr;
  PlanningWindow lookahead;
};

class Controller {
 public:
  virtual ~Controller() = default;
  virtual std::string name() const = 0;
  /// Returns an index into the action grid.
  virtual std::size_t act(const DecisionContext& ctx) = 0;
  /// Called after the environment has executed the chosen action.
  virtual void observe(const TransitionSample& /*sample*/) {}
};

}  // namespace heatrl
