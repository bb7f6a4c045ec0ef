#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <span>
#include <vector>

#include "heatrl/emulator.hpp"
#include "heatrl/mdp.hpp"

namespace heatrl {

/// What a dynamics model sees. Learned models only use `observed`; the
/// emulator clone advances `latent` as well.
struct ModelState {
  ObservedState observed;
  BuildingState latent;
  /// Power drawn during the step that produced this state (W).
  double last_power = 0.0;
};

/// One-step predictor used by the planners. Implementations must be safe to
/// call concurrently from several threads.
class DynamicsModel {
 public:
  virtual ~DynamicsModel() = default;

  /// Next state after applying grid action `action` for one hour, driven by
  /// `state.observed.ambient_now`. `ambient_next` becomes the ambient entry
  /// of the returned observation.
  virtual ModelState predict(const ModelState& state, std::size_t action,
                             double ambient_next) const = 0;
  virtual bool exact() const = 0;
  virtual const ActionGrid& actions() const = 0;
};

/// The true emulator wrapped as a planning model.
class EmulatorModel final : public DynamicsModel {
 public:
  EmulatorModel(BuildingParams params, ActionGrid grid, BackupConfig backup = {});

  ModelState predict(const ModelState& state, std::size_t action,
                     double ambient_next) const override;
  bool exact() const override { return true; }
  const ActionGrid& actions() const override { return grid_; }

 private:
  BuildingParams params_;
  ActionGrid grid_;
  BackupConfig backup_;
};

/// Exogenous lookahead starting at the planning hour. Step k uses
/// prices[k], ambient[k] and bands[k]; ambient[k+1], when present, is the
/// ambient reading of the next observation.
struct PlanningWindow {
  std::span<const double> prices;
  std::span<const double> ambient;
  std::span<const ComfortBand> bands;
  ComfortPenaltyConstants penalty{};

  std::size_t covered() const;
};

struct Plan {
  std::vector<std::size_t> actions;
  double expected_return = 0.0;
};

/// Undiscounted sum of consumption and comfort rewards along the model's
/// predicted trajectory.
double rollout_return(const DynamicsModel& model, const ModelState& start,
                      std::span<const std::size_t> actions, const PlanningWindow& window);

struct CemConfig {
  std::size_t population = 64;
  double elite_fraction = 0.125;
  std::size_t iterations = 20;
  double smoothing = 0.7;  // weight kept on the previous probabilities
  double min_mix = 0.0;    // uniform share blended in after each update
  std::uint64_t seed = 0;

  std::size_t elite_count() const;
  void validate() const;
};

/// Cross-entropy search over per-step categorical action distributions.
/// `warm_start`, if non-empty, biases the initial distribution and is
/// evaluated as a candidate.
Plan plan_cem(const DynamicsModel& model, const ModelState& start, std::size_t horizon,
              const PlanningWindow& window, const CemConfig& cfg,
              std::span<const std::size_t> warm_start = {});

struct GaConfig {
  std::size_t population = 64;
  std::size_t generations = 30;
  std::size_t tournament_size = 3;
  double crossover_rate = 0.9;
  double mutation_rate = 0.1;  // per gene
  std::uint64_t seed = 0;

  void validate() const;
};

struct Genome {
  std::vector<std::size_t> genes;
  double fitness = 0.0;
};

/// Evolves `population` (fitness already evaluated) for one generation:
/// best individual carried over, tournament selection, uniform crossover,
/// per-gene mutation.
std::vector<Genome> ga_next_generation(const DynamicsModel& model, const ModelState& start,
                                       const PlanningWindow& window,
                                       const std::vector<Genome>& population,
                                       const GaConfig& cfg, std::mt19937_64& rng);

/// Runs the GA from `initial` (or a random population when empty).
Plan plan_ga(const DynamicsModel& model, const ModelState& start, std::size_t horizon,
             const PlanningWindow& window, const GaConfig& cfg,
             std::span<const std::size_t> warm_start = {},
             std::vector<Genome>* final_population = nullptr,
             const std::vector<Genome>* initial = nullptr);

/// True argmax over every action sequence. Ties go to lower total energy,
/// then to the lexicographically smaller sequence. Throws DomainError when
/// |actions|^horizon exceeds `cap`.
Plan plan_exhaustive(const DynamicsModel& model, const ModelState& start, std::size_t horizon,
                     const PlanningWindow& window, std::size_t cap = 1296);

enum class PlannerKind { cem, ga, exhaustive };

PlannerKind parse_planner_kind(const std::string& s);

struct PlannerConfig {
  PlannerKind kind = PlannerKind::cem;
  CemConfig cem;
  GaConfig ga;
  std::size_t exhaustive_cap = 1296;
};

Plan plan(const DynamicsModel& model, const ModelState& start, std::size_t horizon,
          const PlanningWindow& window, const PlannerConfig& cfg, std::uint64_t seed,
          std::span<const std::size_t> warm_start = {});

}  // namespace heatrl
