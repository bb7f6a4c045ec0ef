#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace heatrl {

/// Lumped two-node (indoor air, envelope mass) building with a heat pump.
/// Defaults give a ~1 h air time constant and a slow envelope.
struct BuildingParams {
  double indoor_capacitance = 2.0e6;    // J/K
  double envelope_capacitance = 5.0e7;  // J/K
  double ambient_conductance = 100.0;   // W/K
  double envelope_conductance = 500.0;  // W/K
  double cop = 3.0;
  double max_power = 2000.0;  // W
  int substep_seconds = 10;

  /// Throws DomainError if any invariant is violated.
  void validate() const;
  bool operator==(const BuildingParams&) const = default;
};

struct BuildingState {
  double indoor_temp = 21.0;    // °C
  double envelope_temp = 21.0;  // °C
  std::int64_t clock = 0;       // hour index
};

/// Rule-based safety filter in front of the heat pump: full power below
/// `low_trip`, off above `high_trip`, otherwise pass-through.
struct BackupConfig {
  bool enabled = false;
  double low_trip = 19.0;
  double high_trip = 23.0;

  void validate() const;
};

struct StepResult {
  BuildingState state;
  double applied_power = 0.0;  // W, after the backup filter
};

/// Power actually delivered once the backup filter has looked at the
/// current indoor temperature.
double filter_power(double indoor_temp, double requested_power, double max_power,
                    const BackupConfig& backup);

/// One hour of explicit Euler sub-steps composed into an affine map:
/// x' = A·x + b_ambient·T_a + b_power·P with x = (T_i, T_m).
struct HourlyMap {
  double a[2][2] = {{1.0, 0.0}, {0.0, 1.0}};
  double b_ambient[2] = {0.0, 0.0};
  double b_power[2] = {0.0, 0.0};
};

HourlyMap hourly_map(const BuildingParams& params);

/// Advances the building by one hour with explicit Euler sub-steps.
StepResult step(const BuildingState& state, const BuildingParams& params, double ambient,
                double power_w, const BackupConfig& backup = {});

struct AmbientGenParams {
  double mean = 6.0;
  double daily_amplitude = 4.0;
  double drift_start = -4.0;  // offset from mean on day 0
  double drift_end = 6.0;     // offset from mean on the last day of the season
  double season_days = 150.0;
  double peak_hour = 15.0;    // hour of the daily maximum
  double ar_coefficient = 0.9;
  double noise_sigma = 1.0;   // stationary std-dev of the AR(1) component
  double min_temp = -20.0;
  double max_temp = 40.0;
};

struct AmbientTrace {
  enum class Origin { synthetic, file };

  std::vector<double> hourly_temps;
  Origin origin = Origin::synthetic;
  std::uint64_t seed = 0;
  std::string path;

  std::size_t size() const { return hourly_temps.size(); }
  double operator[](std::size_t hour) const { return hourly_temps[hour]; }
};

/// Seasonal drift + daily sinusoid + AR(1) noise, clamped to
/// [min_temp, max_temp]. Deterministic for a given seed.
AmbientTrace make_synthetic_ambient(std::uint64_t seed, int days,
                                    const AmbientGenParams& gen = {});

/// Reads the `hour,temp_c` CSV format.
AmbientTrace load_ambient_csv(const std::filesystem::path& path);
void write_ambient_csv(const AmbientTrace& trace, const std::filesystem::path& path);

}  // namespace heatrl
