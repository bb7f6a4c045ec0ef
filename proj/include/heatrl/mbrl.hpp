#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "heatrl/controller.hpp"
#include "heatrl/neural.hpp"

namespace heatrl {

/// Bounded FIFO store of transitions.
class SampleMemory {
 public:
  explicit SampleMemory(std::size_t capacity = 4096);

  void push(TransitionSample sample);
  std::size_t size() const { return samples_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return samples_.empty(); }
  const TransitionSample& operator[](std::size_t i) const { return samples_[i]; }
  /// Oldest first.
  const std::deque<TransitionSample>& samples() const { return samples_; }

 private:
  std::size_t capacity_;
  std::deque<TransitionSample> samples_;
};

/// ε(d) = ε₀ / dˣ for day counter d >= 1.
struct ExplorationSchedule {
  double initial = 0.5;
  double exponent = 0.7;

  double epsilon(std::int64_t day) const;
  void validate() const;
};

/// Learned one-step model: (history, ambient, power) -> next indoor
/// temperature. The network regresses the normalized temperature change.
class LearnedTransitionModel final : public DynamicsModel {
 public:
  LearnedTransitionModel(nn::MlpSpec spec, ActionGrid grid);

  ModelState predict(const ModelState& state, std::size_t action,
                     double ambient_next) const override;
  bool exact() const override { return false; }
  const ActionGrid& actions() const override { return grid_; }

  /// Predicted indoor temperature after one hour.
  double predict_indoor(const ObservedState& s, std::size_t action) const;
  std::vector<double> input_features(const ObservedState& s, std::size_t action) const;

  nn::Mlp& network() { return net_; }
  const nn::Mlp& network() const { return net_; }
  const nn::Normalizer& input_normalizer() const { return in_norm_; }
  void set_normalizers(nn::Normalizer input, double delta_shift, double delta_scale);
  double delta_shift() const { return delta_shift_; }
  double delta_scale() const { return delta_scale_; }

 private:
  nn::Mlp net_;
  ActionGrid grid_;
  nn::Normalizer in_norm_;
  double delta_shift_ = 0.0;
  double delta_scale_ = 1.0;
};

struct TransitionTrainingConfig {
  std::size_t min_samples = 24;
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  double holdout_fraction = 0.2;
  nn::OptimizerConfig optimizer{};
};

struct TrainingOutcome {
  bool trained = false;  // false: not enough samples, model untouched
  double holdout_mae = 0.0;
  double train_mse = 0.0;
};

/// Refits the normalizers, continues training from the current weights and
/// reports the MAE (°C) on a seeded held-out split of the memory.
TrainingOutcome train_transition_model(const SampleMemory& memory, LearnedTransitionModel& model,
                                       nn::Optimizer& opt, const TransitionTrainingConfig& cfg,
                                       std::uint64_t seed);

struct MbrlConfig {
  std::size_t capacity = 4096;
  std::size_t horizon = 24;
  std::size_t hidden_units = 32;
  std::size_t hidden_layers = 2;
  ExplorationSchedule exploration;
  TransitionTrainingConfig training;
  PlannerConfig planner;
  std::uint64_t seed = 0;
  /// Forces ε (for tests); negative means use the schedule.
  double epsilon_override = -1.0;
};

struct DailyMae {
  std::int64_t day = 0;
  double holdout_mae = 0.0;
};

/// Model-based agent: learns the transition network daily, plans a 24 h
/// open-loop policy on it and explores ε-greedily.
class MbrlAgent final : public Controller {
 public:
  /// `history_length` is the number of indoor readings in the observation.
  MbrlAgent(MbrlConfig cfg, ActionGrid grid, std::size_t history_length);
  /// Plans on `model` instead of the learned network (no training).
  MbrlAgent(MbrlConfig cfg, ActionGrid grid, std::shared_ptr<const DynamicsModel> model);

  std::string name() const override { return "mbrl"; }
  std::size_t act(const DecisionContext& ctx) override;
  void observe(const TransitionSample& sample) override;

  /// Trains (unless this is the first day), advances the day counter and
  /// recomputes the plan from the given context.
  void daily_update(const DecisionContext& ctx);

  std::int64_t day() const { return day_; }
  double epsilon() const;
  const Plan& current_plan() const { return plan_; }
  const SampleMemory& memory() const { return memory_; }
  const std::vector<DailyMae>& mae_history() const { return mae_; }
  const LearnedTransitionModel* learned_model() const { return learned_.get(); }
  const TrainingOutcome& last_training() const { return last_training_; }

 private:
  const DynamicsModel& planning_model() const;

  MbrlConfig cfg_;
  ActionGrid grid_;
  SampleMemory memory_;
  std::unique_ptr<LearnedTransitionModel> learned_;
  std::unique_ptr<nn::Optimizer> optimizer_;
  std::shared_ptr<const DynamicsModel> injected_;
  std::mt19937_64 explore_rng_;
  std::int64_t day_ = 0;
  std::size_t step_in_day_ = 0;
  Plan plan_;
  std::vector<DailyMae> mae_;
  TrainingOutcome last_training_;
};

void write_mae_csv(const std::vector<DailyMae>& mae, const std::filesystem::path& path);

}  // namespace heatrl
