#include "heatrl/emulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "heatrl/csv.hpp"
#include "heatrl/errors.hpp"

namespace heatrl {

void BuildingParams::validate() const {
  if (!(indoor_capacitance > 0 && envelope_capacitance > 0))
    throw DomainError("capacitances must be strictly positive");
  if (!(ambient_conductance > 0 && envelope_conductance > 0))
    throw DomainError("conductances must be strictly positive");
  if (!(cop >= 1.0)) throw DomainError("cop must be >= 1");
  if (!(max_power > 0)) throw DomainError("max_power must be > 0");
  if (substep_seconds <= 0 || 3600 % substep_seconds != 0)
    throw DomainError("substep_seconds must divide 3600");
}

void BackupConfig::validate() const {
  if (!(low_trip < high_trip)) throw DomainError("backup low_trip must be < high_trip");
}

double filter_power(double indoor_temp, double requested_power, double max_power,
                    const BackupConfig& backup) {
  if (!backup.enabled) return requested_power;
  if (indoor_temp < backup.low_trip) return max_power;
  if (indoor_temp > backup.high_trip) return 0.0;
  return requested_power;
}

HourlyMap hourly_map(const BuildingParams& p) {
  p.validate();
  const double dt = static_cast<double>(p.substep_seconds);
  const int substeps = 3600 / p.substep_seconds;
  // one sub-step: x <- x + dt * (J x + u)
  const double j00 = -(p.ambient_conductance + p.envelope_conductance) / p.indoor_capacitance;
  const double j01 = p.envelope_conductance / p.indoor_capacitance;
  const double j10 = p.envelope_conductance / p.envelope_capacitance;
  const double j11 = -p.envelope_conductance / p.envelope_capacitance;
  auto run = [&](double ti, double tm, double drive) {
    for (int k = 0; k < substeps; ++k) {
      const double dti = j00 * ti + j01 * tm + drive;
      const double dtm = j10 * ti + j11 * tm;
      ti += dt * dti;
      tm += dt * dtm;
    }
    return std::pair{ti, tm};
  };
  HourlyMap m;
  const auto c0 = run(1.0, 0.0, 0.0);
  const auto c1 = run(0.0, 1.0, 0.0);
  const auto ua = run(0.0, 0.0, p.ambient_conductance / p.indoor_capacitance);
  const auto up = run(0.0, 0.0, p.cop / p.indoor_capacitance);
  m.a[0][0] = c0.first;
  m.a[1][0] = c0.second;
  m.a[0][1] = c1.first;
  m.a[1][1] = c1.second;
  m.b_ambient[0] = ua.first;
  m.b_ambient[1] = ua.second;
  m.b_power[0] = up.first;
  m.b_power[1] = up.second;
  return m;
}

namespace {

const HourlyMap& cached_map(const BuildingParams& p) {
  thread_local BuildingParams key;
  thread_local HourlyMap map = hourly_map(key);
  if (!(key == p)) {
    map = hourly_map(p);
    key = p;
  }
  return map;
}

}  // namespace

StepResult step(const BuildingState& state, const BuildingParams& p, double ambient,
                double power_w, const BackupConfig& backup) {
  if (!std::isfinite(ambient) || !std::isfinite(power_w) ||
      !std::isfinite(state.indoor_temp) || !std::isfinite(state.envelope_temp))
    throw DomainError("non-finite input to emulator step");
  if (power_w < 0.0 || power_w > p.max_power)
    throw DomainError("power outside [0, max_power]");

  const double applied = filter_power(state.indoor_temp, power_w, p.max_power, backup);
  const HourlyMap& m = cached_map(p);
  const double ti = state.indoor_temp;
  const double tm = state.envelope_temp;
  const double ti2 = m.a[0][0] * ti + m.a[0][1] * tm + m.b_ambient[0] * ambient + m.b_power[0] * applied;
  const double tm2 = m.a[1][0] * ti + m.a[1][1] * tm + m.b_ambient[1] * ambient + m.b_power[1] * applied;
  return {BuildingState{ti2, tm2, state.clock + 1}, applied};
}

AmbientTrace make_synthetic_ambient(std::uint64_t seed, int days, const AmbientGenParams& g) {
  if (days <= 0) throw DomainError("days must be >= 1");
  if (!(g.season_days > 0)) throw DomainError("season_days must be > 0");
  if (!(std::abs(g.ar_coefficient) < 1.0)) throw DomainError("ar_coefficient must be in (-1, 1)");
  if (!(g.noise_sigma >= 0.0)) throw DomainError("noise_sigma must be >= 0");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const std::size_t hours = static_cast<std::size_t>(days) * 24;
  const double season_hours = g.season_days * 24.0;
  const double innovation = g.noise_sigma * std::sqrt(1.0 - g.ar_coefficient * g.ar_coefficient);

  AmbientTrace trace;
  trace.origin = AmbientTrace::Origin::synthetic;
  trace.seed = seed;
  trace.hourly_temps.reserve(hours);

  double noise = g.noise_sigma > 0 ? g.noise_sigma * normal(rng) : 0.0;
  for (std::size_t h = 0; h < hours; ++h) {
    if (h > 0 && g.noise_sigma > 0) noise = g.ar_coefficient * noise + innovation * normal(rng);
    const double frac = std::min(1.0, static_cast<double>(h) / season_hours);
    const double drift = g.drift_start + (g.drift_end - g.drift_start) * frac;
    const double hour_of_day = static_cast<double>(h % 24);
    const double daily = g.daily_amplitude *
                         std::cos(2.0 * std::numbers::pi * (hour_of_day - g.peak_hour) / 24.0);
    trace.hourly_temps.push_back(std::clamp(g.mean + drift + daily + noise, g.min_temp, g.max_temp));
  }
  return trace;
}

AmbientTrace load_ambient_csv(const std::filesystem::path& path) {
  const auto lines = csv::read_lines(path);
  if (lines.empty()) throw ParseError(path.string() + ": empty ambient file");

  AmbientTrace trace;
  trace.origin = AmbientTrace::Origin::file;
  trace.path = path.string();

  std::size_t first = 0;
  if (lines[0].rfind("hour", 0) == 0) first = 1;
  for (std::size_t i = first; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto line_no = std::to_string(i + 1);
    const auto fields = csv::split(lines[i]);
    if (fields.size() != 2)
      throw ParseError(path.string() + ":" + line_no + ": expected 2 columns");
    long long hour = 0;
    double temp = 0;
    if (!csv::parse_long(fields[0], hour) || !csv::parse_double(fields[1], temp))
      throw ParseError(path.string() + ":" + line_no + ": malformed row");
    if (!std::isfinite(temp))
      throw ParseError(path.string() + ":" + line_no + ": non-finite temperature");
    trace.hourly_temps.push_back(temp);
  }
  if (trace.hourly_temps.empty()) throw ParseError(path.string() + ": no data rows");
  return trace;
}

void write_ambient_csv(const AmbientTrace& trace, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "hour,temp_c\n";
  for (std::size_t h = 0; h < trace.size(); ++h) out << h << ',' << csv::format(trace[h]) << '\n';
  csv::write_file(path, out.str());
}

}  // namespace heatrl
