#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace heatrl {

/// Agent-visible state: indoor temperature history (newest first, n+1
/// entries) plus the current ambient temperature.
struct ObservedState {
  std::vector<double> indoor_history;
  double ambient_now = 0.0;

  double indoor_now() const { return indoor_history.front(); }
  std::size_t feature_count() const { return indoor_history.size() + 1; }
  /// Flattened feature vector: history followed by ambient.
  std::vector<double> features() const;

  bool operator==(const ObservedState&) const = default;
};

/// Builds an observation from a newest-first history. Throws DomainError if
/// the history is shorter than n+1.
ObservedState encode_state(std::span<const double> history, double ambient, std::size_t n);

/// Shifts `prev` by one hour: `new_indoor` becomes the newest entry and the
/// oldest drops off.
ObservedState advance_state(const ObservedState& prev, double new_indoor, double new_ambient);

/// Observation at episode start: the initial temperature replicated n+1 times.
ObservedState initial_state(double indoor, double ambient, std::size_t n);

class ActionGrid {
 public:
  /// 0, 400, ..., 2000 W.
  ActionGrid();
  explicit ActionGrid(std::vector<double> levels_w);

  std::size_t size() const { return levels_.size(); }
  double power(std::size_t index) const { return levels_.at(index); }
  double max_power() const { return levels_.back(); }
  std::size_t max_index() const { return levels_.size() - 1; }
  const std::vector<double>& levels() const { return levels_; }

  /// Throws DomainError unless levels fit within [0, max_power].
  void validate_against(double max_power) const;

 private:
  std::vector<double> levels_;
};

struct ComfortBand {
  double t_min = 19.0;
  double t_max = 23.0;

  void validate() const;
  bool contains(double t) const { return t >= t_min && t <= t_max; }
  bool operator==(const ComfortBand&) const = default;
};

struct RewardComponents {
  double cons = 0.0;
  double comfort = 0.0;
  double total() const { return cons + comfort; }
};

/// Energy bill of one hour at constant power, as a non-positive reward (EUR).
double consumption_reward(double power_w, double price_eur_per_kwh);

/// Asymmetric comfort penalty: 0 inside [t_min, t_max], −3·1.3^(T−t_max)
/// above, −4·1.35^(t_min−T) below.
double comfort_reward(double t_i, const ComfortBand& band);

struct ComfortPenaltyConstants {
  double above_scale = 3.0;
  double above_base = 1.3;
  double below_scale = 4.0;
  double below_base = 1.35;
};

/// Same shape as comfort_reward with configurable constants (for sweeps).
double comfort_reward(double t_i, const ComfortBand& band, const ComfortPenaltyConstants& k);

enum class TariffKind { flat, dual, real_time };

std::string to_string(TariffKind kind);
TariffKind parse_tariff_kind(const std::string& s);

struct TariffConfig {
  double flat_price = 0.24;
  double day_price = 0.28;
  double night_price = 0.20;
  int day_start_hour = 7;
  int day_end_hour = 22;
  // Real-time generator: bounded random walk with mild daily shape.
  std::uint64_t rtp_seed = 0;
  double rtp_mean = 0.24;
  double rtp_step_sigma = 0.02;
  double rtp_min = 0.05;
  double rtp_max = 0.60;

  void validate() const;
};

struct TariffSignal {
  TariffKind kind = TariffKind::flat;
  std::vector<double> prices;  // EUR/kWh per hour

  std::size_t size() const { return prices.size(); }
  double operator[](std::size_t hour) const { return prices[hour]; }
  std::span<const double> window(std::size_t from, std::size_t length) const;
};

TariffSignal make_tariff(TariffKind kind, std::size_t horizon_hours, const TariffConfig& cfg = {});
/// Reads `hour,price_eur_per_kwh`.
TariffSignal load_tariff_csv(const std::filesystem::path& path);

struct TransitionSample {
  ObservedState s;
  std::size_t a = 0;
  ObservedState s_next;
  RewardComponents r;
  bool terminal = false;
};

/// One simulated hour: the action applied during `hour` and the state at
/// the end of it.
struct StepRecord {
  std::int64_t hour = 0;
  double t_a = 0.0;
  double t_i = 0.0;
  double t_mass = 0.0;
  double power_w = 0.0;
  double price = 0.0;
  double r_cons = 0.0;
  double r_comfort = 0.0;

  double energy_kwh() const { return power_w / 1000.0; }
  double cost_eur() const { return energy_kwh() * price; }
};

struct EpisodeLog {
  std::vector<StepRecord> records;
  /// Hours before this index were uncontrolled warm-up.
  std::size_t controlled_from = 0;

  std::size_t size() const { return records.size(); }
  /// Records from `controlled_from` on.
  std::span<const StepRecord> controlled() const;
};

inline constexpr const char* kEpisodeLogHeader =
    "hour,t_a,t_i,t_mass,power_w,price,r_cons,r_comfort";

std::string episode_log_csv(const EpisodeLog& log);
void write_episode_log(const EpisodeLog& log, const std::filesystem::path& path);
EpisodeLog read_episode_log(const std::filesystem::path& path);

struct ComparisonMetrics {
  double consumption_change_pct = 0.0;
  double cost_change_pct = 0.0;
  double comfort_loss_eur = 0.0;
};

/// Percent changes of energy and cost of `agent` relative to `baseline`,
/// plus the agent's accumulated comfort loss. Both spans must cover the
/// same hours with identical ambient and price traces.
ComparisonMetrics log_metrics(std::span<const StepRecord> agent,
                              std::span<const StepRecord> baseline);
ComparisonMetrics log_metrics(const EpisodeLog& agent, const EpisodeLog& baseline);

}  // namespace heatrl
