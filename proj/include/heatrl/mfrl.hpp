#pragma once

#include <optional>
#include <random>
#include <vector>

#include "heatrl/controller.hpp"
#include "heatrl/mbrl.hpp"
#include "heatrl/neural.hpp"

namespace heatrl {

/// Binary sum tree over non-negative leaf weights. Internal nodes are
/// recomputed from their children on every update, so the root never drifts.
class SumTree {
 public:
  explicit SumTree(std::size_t leaves = 0);

  void set(std::size_t leaf, double weight);
  double get(std::size_t leaf) const { return nodes_[base_ + leaf]; }
  double total() const { return nodes_.empty() ? 0.0 : nodes_[1]; }
  std::size_t leaves() const { return leaves_; }
  /// Leaf whose cumulative weight interval contains `mass` in [0, total()).
  std::size_t find(double mass) const;

 private:
  std::size_t leaves_ = 0;
  std::size_t base_ = 1;
  std::vector<double> nodes_;
};

/// Bounded replay memory sampled proportionally to priority^alpha. FIFO
/// eviction when full.
class PrioritizedReplay {
 public:
  PrioritizedReplay(std::size_t capacity, double alpha, double offset);

  /// Stores a sample; returns its slot index.
  std::size_t push(TransitionSample sample, double priority);
  /// Draws `batch` distinct slots. Throws DomainError if size() < batch.
  std::vector<std::size_t> sample(std::size_t batch, std::mt19937_64& rng);
  void update_priority(std::size_t slot, double priority);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  double alpha() const { return alpha_; }
  double offset() const { return offset_; }
  double priority(std::size_t slot) const { return priorities_.at(slot); }
  /// Current sampling probability of `slot`.
  double probability(std::size_t slot) const;
  double weight_sum() const { return tree_.total(); }
  const TransitionSample& operator[](std::size_t slot) const { return samples_.at(slot); }

 private:
  std::size_t capacity_;
  double alpha_;
  double offset_;
  std::vector<TransitionSample> samples_;
  std::vector<double> priorities_;
  SumTree tree_;
  std::size_t next_ = 0;
  std::size_t size_ = 0;
};

/// |target - q| + offset.
double compute_priority(double target, double q_sa, double offset);

/// Online Q network and its slowly-tracking target copy.
struct QPair {
  nn::Mlp online;
  nn::Mlp target;
  double tau = 0.01;
  double gamma = 0.95;

  QPair() = default;
  QPair(nn::Mlp net, double tau, double gamma);
};

/// w⁻ ← τ·w + (1−τ)·w⁻.
void soft_update(QPair& pair);

enum class TargetRule {
  double_q,     // online network selects a', target network evaluates it
  target_argmax // a' selected by the target network as well
};

/// Bootstrap target of one transition: r if terminal, otherwise
/// r + γ·Q⁻(s', a*) with a* picked according to `rule`. `features` are the
/// network inputs of s'.
double q_target(double reward, bool terminal, std::span<const double> next_features,
                const QPair& pair, TargetRule rule = TargetRule::double_q);

/// Index of the largest value; ties go to the lowest index.
std::size_t argmax_lowest(std::span<const double> values);

struct MfrlConfig {
  std::size_t capacity = 4096;
  double alpha = 0.6;
  double priority_offset = 1e-3;
  double gamma = 0.95;
  double tau = 0.01;
  std::size_t batch_size = 32;
  std::size_t warmup = 96;
  std::size_t train_every = 24;
  std::size_t batches_per_cycle = 64;
  std::size_t hidden_units = 64;
  std::size_t hidden_layers = 2;
  nn::OptimizerConfig optimizer{};
  ExplorationSchedule exploration;
  TargetRule rule = TargetRule::double_q;
  std::uint64_t seed = 0;
  double epsilon_override = -1.0;
  bool record_q_trace = false;
};

struct QTraceRow {
  std::int64_t hour = 0;
  std::vector<double> q;
  std::size_t chosen = 0;
};

/// ε-greedy double deep fitted-Q agent with prioritized replay and a soft
/// target network.
class MfrlAgent final : public Controller {
 public:
  /// `feature_count` is the width of ObservedState::features().
  MfrlAgent(MfrlConfig cfg, ActionGrid grid, std::size_t feature_count);

  std::string name() const override { return "mfrl"; }
  std::size_t act(const DecisionContext& ctx) override;
  void observe(const TransitionSample& sample) override;

  /// ε-greedy choice given the current ε.
  std::size_t select_action(const ObservedState& s, double epsilon);
  std::vector<double> q_values(const ObservedState& s) const;

  /// One training cycle (batches_per_cycle mini-batches). Returns false and
  /// leaves the networks untouched while the replay is below warm-up.
  bool train_cycle();

  /// Stores a transition with its initial priority (no training).
  void store(const TransitionSample& sample);

  double epsilon(std::int64_t controlled_hour) const;
  QPair& networks() { return pair_; }
  const QPair& networks() const { return pair_; }
  const PrioritizedReplay& replay() const { return replay_; }
  const nn::Normalizer& normalizer() const { return norm_; }
  void set_normalizer(nn::Normalizer n) { norm_ = std::move(n); normalizer_fitted_ = true; }
  const std::vector<QTraceRow>& q_trace() const { return trace_; }
  std::size_t cycles_trained() const { return cycles_; }

 private:
  std::vector<double> features(const ObservedState& s) const;
  double target_for(const TransitionSample& s) const;

  MfrlConfig cfg_;
  ActionGrid grid_;
  QPair pair_;
  nn::Optimizer opt_;
  PrioritizedReplay replay_;
  nn::Normalizer norm_;
  bool normalizer_fitted_ = false;
  std::mt19937_64 rng_;
  std::size_t since_train_ = 0;
  std::size_t cycles_ = 0;
  std::vector<QTraceRow> trace_;
};

void write_q_trace_csv(const std::vector<QTraceRow>& rows, const std::filesystem::path& path);

}  // namespace heatrl
