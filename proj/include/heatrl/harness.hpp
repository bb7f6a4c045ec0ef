#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "heatrl/baseline.hpp"
#include "heatrl/config.hpp"
#include "heatrl/emulator.hpp"
#include "heatrl/mbrl.hpp"
#include "heatrl/mdp.hpp"
#include "heatrl/mfrl.hpp"

namespace heatrl {

enum class AgentKind { rbc, mpc, mbrl, mfrl };

std::string to_string(AgentKind kind);
AgentKind parse_agent_kind(const std::string& s);

/// Comfort band in force from `start_day` (0-based, counted from hour 0)
/// until the next phase.
struct BandPhase {
  std::int64_t start_day = 0;
  ComfortBand band;
};

struct Scenario {
  std::string name = "scenario";
  int days = 30;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> ambient_seed;  // defaults to seed
  AgentKind agent = AgentKind::mpc;

  TariffKind tariff = TariffKind::flat;
  TariffConfig tariff_config;
  std::string tariff_file;

  BuildingParams building;
  AmbientGenParams ambient;
  std::string ambient_file;
  double initial_temp = 21.0;
  int warmup_hours = 24;
  std::size_t history = 3;  // n: observation holds n+1 indoor readings
  ActionGrid grid;

  std::vector<BandPhase> bands{{0, ComfortBand{}}};
  BackupConfig backup;
  ComfortPenaltyConstants penalty;

  RbcConfig rbc;
  MpcConfig mpc;
  MbrlConfig mbrl;
  MfrlConfig mfrl;

  double convergence_threshold = 0.05;  // EUR over the trailing window
  int convergence_window_days = 3;

  std::size_t total_hours() const { return static_cast<std::size_t>(days) * 24; }
  ComfortBand band_at(std::size_t hour) const;
  /// Throws ConfigError describing the first inconsistency found.
  void validate() const;
};

/// Applies every recognised key; unknown keys raise ConfigError.
void apply_config(Scenario& scenario, const KeyValueConfig& cfg);
Scenario load_scenario(const std::filesystem::path& path);

/// Exogenous sequences for one run, extended past the horizon for lookahead.
struct Traces {
  AmbientTrace ambient;
  TariffSignal tariff;
  std::vector<ComfortBand> bands;
};

Traces make_traces(const Scenario& scenario);

std::unique_ptr<Controller> make_controller(const Scenario& scenario, AgentKind kind);

struct EpisodeResult {
  EpisodeLog log;
  double wall_seconds = 0.0;
  double decision_seconds = 0.0;
  std::size_t decisions = 0;
};

/// Runs the uncontrolled warm-up, then hands control to `controller`.
EpisodeResult simulate(const Scenario& scenario, const Traces& traces, Controller& controller);

struct ConvergenceEstimate {
  bool converged = false;
  std::int64_t day = -1;    // 1-based controlled day, -1 when never converged
  std::int64_t hours = -1;  // hours of experience before `day`
};

/// First controlled day D such that every trailing `window_days` comfort
/// penalty lying entirely within [D, end] stays below `threshold`.
ConvergenceEstimate estimate_convergence(const EpisodeLog& log, double threshold = 0.05,
                                         int window_days = 3);

struct RunReport {
  std::string scenario;
  AgentKind agent = AgentKind::rbc;
  std::filesystem::path agent_log_path;
  std::filesystem::path baseline_log_path;
  EpisodeLog agent_log;
  EpisodeLog baseline_log;
  ComparisonMetrics metrics;
  std::optional<ComparisonMetrics> post_convergence;
  ConvergenceEstimate convergence;
  double wall_clock_seconds = 0.0;
  double decision_seconds = 0.0;
  std::size_t decisions = 0;
  std::vector<DailyMae> model_mae;
  std::vector<QTraceRow> q_trace;
};

/// Runs the agent and the RBC baseline on identical traces. When `out_dir`
/// is non-empty, writes `<name>_<agent>.csv`, `<name>_rbc.csv` and
/// `<name>_metrics.csv` there.
RunReport run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir = {});

struct SuiteConfig {
  Scenario base;
  std::vector<AgentKind> agents{AgentKind::rbc, AgentKind::mpc, AgentKind::mbrl, AgentKind::mfrl};
  std::vector<std::uint64_t> seeds{0};
};

SuiteConfig load_suite(const std::filesystem::path& path);

struct SuiteRow {
  AgentKind agent = AgentKind::rbc;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  ComparisonMetrics metrics;
  ConvergenceEstimate convergence;
  double wall_clock_seconds = 0.0;
  double decision_seconds = 0.0;
};

/// Every agent on every seed against the shared RBC baseline of that seed.
/// A failing agent is recorded in its row and the suite continues. Writes
/// `suite_table.csv` plus per-run logs when `out_dir` is non-empty.
std::vector<SuiteRow> run_suite(const SuiteConfig& suite, const std::filesystem::path& out_dir = {});
std::string suite_table_csv(const std::vector<SuiteRow>& rows);

enum class PlotKind { temperature_trace, action_histogram, hourly_action_heatmap, model_mae };

PlotKind parse_plot_kind(const std::string& s);

/// Writes a plot-ready CSV derived from `input` (an episode log, or a
/// `day,holdout_mae_c` file for model_mae) into `out_dir`. Returns its path.
std::filesystem::path emit_plot_data(PlotKind kind, const std::filesystem::path& input,
                                     const std::filesystem::path& out_dir,
                                     const Scenario& scenario = {});

std::string temperature_trace_csv(const EpisodeLog& log, const Scenario& scenario);
std::string action_histogram_csv(const EpisodeLog& log, const ActionGrid& grid);
std::string hourly_action_heatmap_csv(const EpisodeLog& log, const ActionGrid& grid);

/// Grid index whose power is closest to `power_w`.
std::size_t nearest_action(const ActionGrid& grid, double power_w);

}  // namespace heatrl
