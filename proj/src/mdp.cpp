#include "heatrl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "heatrl/csv.hpp"
#include "heatrl/errors.hpp"

namespace heatrl {

std::vector<double> ObservedState::features() const {
  std::vector<double> out(indoor_history);
  out.push_back(ambient_now);
  return out;
}

ObservedState encode_state(std::span<const double> history, double ambient, std::size_t n) {
  if (history.size() < n + 1)
    throw DomainError("history shorter than n+1; pad with the initial temperature");
  if (!std::isfinite(ambient)) throw DomainError("non-finite ambient temperature");
  ObservedState s;
  s.indoor_history.assign(history.begin(), history.begin() + static_cast<std::ptrdiff_t>(n + 1));
  for (double t : s.indoor_history)
    if (!std::isfinite(t)) throw DomainError("non-finite indoor temperature in history");
  s.ambient_now = ambient;
  return s;
}

ObservedState advance_state(const ObservedState& prev, double new_indoor, double new_ambient) {
  ObservedState s;
  s.indoor_history.resize(prev.indoor_history.size());
  s.indoor_history[0] = new_indoor;
  std::copy(prev.indoor_history.begin(), prev.indoor_history.end() - 1,
            s.indoor_history.begin() + 1);
  s.ambient_now = new_ambient;
  return s;
}

ObservedState initial_state(double indoor, double ambient, std::size_t n) {
  return ObservedState{std::vector<double>(n + 1, indoor), ambient};
}

ActionGrid::ActionGrid() : ActionGrid({0.0, 400.0, 800.0, 1200.0, 1600.0, 2000.0}) {}

ActionGrid::ActionGrid(std::vector<double> levels_w) : levels_(std::move(levels_w)) {
  if (levels_.empty()) throw DomainError("action grid must not be empty");
  if (levels_.front() != 0.0) throw DomainError("action grid must start at 0 W");
  for (std::size_t i = 1; i < levels_.size(); ++i)
    if (!(levels_[i] > levels_[i - 1])) throw DomainError("action grid must be strictly increasing");
}

void ActionGrid::validate_against(double max_power) const {
  if (levels_.back() > max_power) throw DomainError("action grid exceeds max_power");
}

void ComfortBand::validate() const {
  if (!(t_min < t_max)) throw DomainError("comfort band requires t_min < t_max");
}

double consumption_reward(double power_w, double price) {
  if (!(power_w >= 0.0)) throw DomainError("negative power");
  if (!(price > 0.0)) throw DomainError("price must be positive");
  return -(power_w / 1000.0) * price;
}

double comfort_reward(double t_i, const ComfortBand& band) {
  return comfort_reward(t_i, band, ComfortPenaltyConstants{});
}

double comfort_reward(double t_i, const ComfortBand& band, const ComfortPenaltyConstants& k) {
  if (!std::isfinite(t_i)) throw DomainError("non-finite indoor temperature");
  if (t_i > band.t_max) return -k.above_scale * std::pow(k.above_base, t_i - band.t_max);
  if (band.t_min > t_i) return -k.below_scale * std::pow(k.below_base, band.t_min - t_i);
  return 0.0;
}

std::string to_string(TariffKind kind) {
  switch (kind) {
    case TariffKind::flat: return "flat";
    case TariffKind::dual: return "dual";
    case TariffKind::real_time: return "rtp";
  }
  return "?";
}

TariffKind parse_tariff_kind(const std::string& s) {
  if (s == "flat") return TariffKind::flat;
  if (s == "dual") return TariffKind::dual;
  if (s == "rtp" || s == "real_time") return TariffKind::real_time;
  throw ParseError("unknown tariff kind: " + s);
}

void TariffConfig::validate() const {
  if (!(flat_price > 0 && day_price > 0 && night_price > 0))
    throw DomainError("tariff prices must be positive");
  if (!(rtp_min > 0 && rtp_max > rtp_min && rtp_mean > 0))
    throw DomainError("real-time price bounds must be positive and ordered");
  if (day_start_hour < 0 || day_start_hour > 24 || day_end_hour < 0 || day_end_hour > 24)
    throw DomainError("day window hours must lie in [0, 24]");
}

std::span<const double> TariffSignal::window(std::size_t from, std::size_t length) const {
  if (from + length > prices.size()) throw DomainError("tariff window beyond signal length");
  return std::span<const double>(prices).subspan(from, length);
}

TariffSignal make_tariff(TariffKind kind, std::size_t horizon, const TariffConfig& cfg) {
  if (horizon == 0) throw DomainError("tariff horizon must be >= 1");
  cfg.validate();
  TariffSignal sig;
  sig.kind = kind;
  sig.prices.resize(horizon);
  switch (kind) {
    case TariffKind::flat:
      std::fill(sig.prices.begin(), sig.prices.end(), cfg.flat_price);
      break;
    case TariffKind::dual:
      for (std::size_t h = 0; h < horizon; ++h) {
        const int hod = static_cast<int>(h % 24);
        const bool day = hod >= cfg.day_start_hour && hod < cfg.day_end_hour;
        sig.prices[h] = day ? cfg.day_price : cfg.night_price;
      }
      break;
    case TariffKind::real_time: {
      std::mt19937_64 rng(cfg.rtp_seed);
      std::normal_distribution<double> normal(0.0, cfg.rtp_step_sigma);
      double p = cfg.rtp_mean;
      for (std::size_t h = 0; h < horizon; ++h) {
        // weak pull towards the mean keeps the walk from sticking to a bound
        p += 0.05 * (cfg.rtp_mean - p) + normal(rng);
        p = std::clamp(p, cfg.rtp_min, cfg.rtp_max);
        sig.prices[h] = p;
      }
      break;
    }
  }
  return sig;
}

TariffSignal load_tariff_csv(const std::filesystem::path& path) {
  const auto lines = csv::read_lines(path);
  if (lines.empty()) throw ParseError(path.string() + ": empty tariff file");
  TariffSignal sig;
  sig.kind = TariffKind::real_time;
  std::size_t first = lines[0].rfind("hour", 0) == 0 ? 1 : 0;
  for (std::size_t i = first; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = csv::split(lines[i]);
    long long hour = 0;
    double price = 0;
    if (fields.size() != 2 || !csv::parse_long(fields[0], hour) ||
        !csv::parse_double(fields[1], price))
      throw ParseError(path.string() + ":" + std::to_string(i + 1) + ": malformed row");
    if (!(price > 0) || !std::isfinite(price))
      throw ParseError(path.string() + ":" + std::to_string(i + 1) + ": price must be positive");
    sig.prices.push_back(price);
  }
  if (sig.prices.empty()) throw ParseError(path.string() + ": no data rows");
  return sig;
}

std::span<const StepRecord> EpisodeLog::controlled() const {
  const std::size_t from = std::min(controlled_from, records.size());
  return std::span<const StepRecord>(records).subspan(from);
}

std::string episode_log_csv(const EpisodeLog& log) {
  std::ostringstream out;
  out << kEpisodeLogHeader << '\n';
  for (const auto& r : log.records) {
    out << r.hour << ',' << csv::format(r.t_a) << ',' << csv::format(r.t_i) << ','
        << csv::format(r.t_mass) << ',' << csv::format(r.power_w) << ',' << csv::format(r.price)
        << ',' << csv::format(r.r_cons) << ',' << csv::format(r.r_comfort) << '\n';
  }
  return out.str();
}

void write_episode_log(const EpisodeLog& log, const std::filesystem::path& path) {
  csv::write_file(path, episode_log_csv(log));
}

EpisodeLog read_episode_log(const std::filesystem::path& path) {
  const auto lines = csv::read_lines(path);
  if (lines.empty() || lines[0] != kEpisodeLogHeader)
    throw ParseError(path.string() + ": missing episode-log header");
  EpisodeLog log;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = csv::split(lines[i]);
    StepRecord r;
    long long hour = 0;
    if (f.size() != 8 || !csv::parse_long(f[0], hour) || !csv::parse_double(f[1], r.t_a) ||
        !csv::parse_double(f[2], r.t_i) || !csv::parse_double(f[3], r.t_mass) ||
        !csv::parse_double(f[4], r.power_w) || !csv::parse_double(f[5], r.price) ||
        !csv::parse_double(f[6], r.r_cons) || !csv::parse_double(f[7], r.r_comfort))
      throw ParseError(path.string() + ":" + std::to_string(i + 1) + ": malformed row");
    r.hour = hour;
    log.records.push_back(r);
  }
  return log;
}

namespace {

double pct_change(double agent, double base) {
  if (base == 0.0) {
    if (agent == 0.0) return 0.0;
    throw DomainError("baseline total is zero; percent change undefined");
  }
  return 100.0 * (agent - base) / base;
}

}  // namespace

ComparisonMetrics log_metrics(std::span<const StepRecord> agent,
                              std::span<const StepRecord> baseline) {
  if (agent.size() != baseline.size()) throw DomainError("logs cover different horizons");
  double e_agent = 0, e_base = 0, c_agent = 0, c_base = 0, comfort = 0;
  for (std::size_t i = 0; i < agent.size(); ++i) {
    const auto& a = agent[i];
    const auto& b = baseline[i];
    if (a.hour != b.hour || a.t_a != b.t_a || a.price != b.price)
      throw DomainError("logs do not share ambient/tariff traces at hour " +
                        std::to_string(a.hour));
    e_agent += a.energy_kwh();
    e_base += b.energy_kwh();
    c_agent += a.cost_eur();
    c_base += b.cost_eur();
    comfort -= a.r_comfort;
  }
  return {pct_change(e_agent, e_base), pct_change(c_agent, c_base), comfort};
}

ComparisonMetrics log_metrics(const EpisodeLog& agent, const EpisodeLog& baseline) {
  if (agent.controlled_from != baseline.controlled_from)
    throw DomainError("logs have different warm-up lengths");
  return log_metrics(agent.controlled(), baseline.controlled());
}

}  // namespace heatrl
