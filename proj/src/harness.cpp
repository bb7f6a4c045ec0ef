#include "heatrl/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "heatrl/csv.hpp"
#include "heatrl/errors.hpp"

namespace heatrl {

std::string to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::rbc: return "rbc";
    case AgentKind::mpc: return "mpc";
    case AgentKind::mbrl: return "mbrl";
    case AgentKind::mfrl: return "mfrl";
  }
  return "?";
}

AgentKind parse_agent_kind(const std::string& s) {
  if (s == "rbc") return AgentKind::rbc;
  if (s == "mpc") return AgentKind::mpc;
  if (s == "mbrl") return AgentKind::mbrl;
  if (s == "mfrl") return AgentKind::mfrl;
  throw ParseError("unknown agent: " + s);
}

ComfortBand Scenario::band_at(std::size_t hour) const {
  const auto day = static_cast<std::int64_t>(hour / 24);
  ComfortBand band = bands.front().band;
  for (const auto& phase : bands)
    if (phase.start_day <= day) band = phase.band;
  return band;
}

void Scenario::validate() const {
  auto fail = [&](const std::string& msg) { throw ConfigError(name + ": " + msg); };
  if (days < 1) fail("days must be >= 1");
  if (warmup_hours < 0) fail("warmup_hours must be >= 0");
  if (static_cast<std::size_t>(warmup_hours) >= total_hours())
    fail("warm-up covers the whole run; increase days");
  if (bands.empty() || bands.front().start_day != 0) fail("band schedule must start at day 0");
  for (std::size_t i = 0; i < bands.size(); ++i) {
    if (!(bands[i].band.t_min < bands[i].band.t_max)) fail("comfort band requires t_min < t_max");
    if (i > 0 && bands[i].start_day <= bands[i - 1].start_day)
      fail("band schedule days must be strictly increasing");
  }
  if (!std::isfinite(initial_temp)) fail("initial_temp must be finite");
  if (mpc.horizon == 0 || mbrl.horizon == 0) fail("planning horizon must be >= 1");
  if (convergence_window_days < 1) fail("convergence window must be >= 1 day");
  try {
    building.validate();
    grid.validate_against(building.max_power);
    backup.validate();
    rbc.validate();
    tariff_config.validate();
    mpc.planner.cem.validate();
    mpc.planner.ga.validate();
    mbrl.planner.cem.validate();
    mbrl.planner.ga.validate();
    mbrl.exploration.validate();
    mfrl.exploration.validate();
  } catch (const DomainError& e) {
    fail(e.what());
  }
  if (!(mfrl.gamma >= 0 && mfrl.gamma < 1)) fail("mfrl.gamma must be in [0, 1)");
  if (!(mfrl.tau > 0 && mfrl.tau <= 1)) fail("mfrl.tau must be in (0, 1]");
  if (mfrl.batch_size == 0 || mfrl.batch_size > mfrl.capacity) fail("mfrl.batch_size must be in [1, capacity]");
  if (mbrl.capacity == 0 || mfrl.capacity == 0) fail("memory capacity must be >= 1");
}

namespace {

std::vector<BandPhase> parse_band_schedule(const std::string& text) {
  // "day:tmin:tmax; day:tmin:tmax; ..."
  std::vector<BandPhase> out;
  for (auto item : csv::split(text, ';')) {
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item.empty()) continue;
    const auto f = csv::split(item, ':');
    long long day = 0;
    BandPhase p;
    if (f.size() != 3 || !csv::parse_long(f[0], day) || !csv::parse_double(f[1], p.band.t_min) ||
        !csv::parse_double(f[2], p.band.t_max))
      throw ParseError("malformed band_schedule entry: " + std::string(item));
    p.start_day = day;
    out.push_back(p);
  }
  if (out.empty()) throw ParseError("empty band_schedule");
  return out;
}

void read_planner(const KeyValueConfig& c, const std::string& prefix, PlannerConfig& p) {
  if (auto v = c.get(prefix + "planner")) p.kind = parse_planner_kind(*v);
  c.read(prefix + "cem.population", p.cem.population);
  c.read(prefix + "cem.elite_fraction", p.cem.elite_fraction);
  c.read(prefix + "cem.iterations", p.cem.iterations);
  c.read(prefix + "cem.smoothing", p.cem.smoothing);
  c.read(prefix + "cem.min_mix", p.cem.min_mix);
  c.read(prefix + "ga.population", p.ga.population);
  c.read(prefix + "ga.generations", p.ga.generations);
  c.read(prefix + "ga.tournament_size", p.ga.tournament_size);
  c.read(prefix + "ga.crossover_rate", p.ga.crossover_rate);
  c.read(prefix + "ga.mutation_rate", p.ga.mutation_rate);
  c.read(prefix + "exhaustive.cap", p.exhaustive_cap);
}

}  // namespace

void apply_config(Scenario& s, const KeyValueConfig& c) {
  c.read("name", s.name);
  c.read("days", s.days);
  if (auto v = c.get_int("seed")) s.seed = static_cast<std::uint64_t>(*v);
  if (auto v = c.get_int("ambient_seed")) s.ambient_seed = static_cast<std::uint64_t>(*v);
  if (auto v = c.get("agent")) s.agent = parse_agent_kind(*v);
  if (auto v = c.get("price")) s.tariff = parse_tariff_kind(*v);

  c.read("tariff.flat_price", s.tariff_config.flat_price);
  c.read("tariff.day_price", s.tariff_config.day_price);
  c.read("tariff.night_price", s.tariff_config.night_price);
  c.read("tariff.day_start_hour", s.tariff_config.day_start_hour);
  c.read("tariff.day_end_hour", s.tariff_config.day_end_hour);
  if (auto v = c.get_int("tariff.rtp_seed")) s.tariff_config.rtp_seed = static_cast<std::uint64_t>(*v);
  c.read("tariff.rtp_mean", s.tariff_config.rtp_mean);
  c.read("tariff.rtp_step_sigma", s.tariff_config.rtp_step_sigma);
  c.read("tariff.rtp_min", s.tariff_config.rtp_min);
  c.read("tariff.rtp_max", s.tariff_config.rtp_max);
  c.read("tariff_file", s.tariff_file);

  c.read("building.indoor_capacitance", s.building.indoor_capacitance);
  c.read("building.envelope_capacitance", s.building.envelope_capacitance);
  c.read("building.ambient_conductance", s.building.ambient_conductance);
  c.read("building.envelope_conductance", s.building.envelope_conductance);
  c.read("building.cop", s.building.cop);
  c.read("building.max_power", s.building.max_power);
  c.read("building.substep_seconds", s.building.substep_seconds);

  c.read("ambient.mean", s.ambient.mean);
  c.read("ambient.daily_amplitude", s.ambient.daily_amplitude);
  c.read("ambient.drift_start", s.ambient.drift_start);
  c.read("ambient.drift_end", s.ambient.drift_end);
  c.read("ambient.season_days", s.ambient.season_days);
  c.read("ambient.peak_hour", s.ambient.peak_hour);
  c.read("ambient.ar_coefficient", s.ambient.ar_coefficient);
  c.read("ambient.noise_sigma", s.ambient.noise_sigma);
  c.read("ambient.min_temp", s.ambient.min_temp);
  c.read("ambient.max_temp", s.ambient.max_temp);
  c.read("ambient_file", s.ambient_file);

  c.read("initial_temp", s.initial_temp);
  c.read("warmup_hours", s.warmup_hours);
  c.read("history", s.history);
  if (auto v = c.get("action_levels")) {
    std::vector<double> levels;
    for (auto tok : csv::split(*v)) {
      double x = 0;
      if (!csv::parse_double(tok, x)) throw ParseError("bad action level: " + std::string(tok));
      levels.push_back(x);
    }
    s.grid = ActionGrid(std::move(levels));
  }

  if (auto v = c.get("band_schedule")) s.bands = parse_band_schedule(*v);
  {
    auto& b = s.bands.front().band;
    if (c.has("comfort.t_min") || c.has("comfort.t_max")) {
      if (s.bands.size() > 1) throw ConfigError("comfort.* conflicts with band_schedule");
      c.read("comfort.t_min", b.t_min);
      c.read("comfort.t_max", b.t_max);
    }
  }
  c.read("backup.enabled", s.backup.enabled);
  c.read("backup.low_trip", s.backup.low_trip);
  c.read("backup.high_trip", s.backup.high_trip);
  c.read("reward.above_scale", s.penalty.above_scale);
  c.read("reward.above_base", s.penalty.above_base);
  c.read("reward.below_scale", s.penalty.below_scale);
  c.read("reward.below_base", s.penalty.below_base);

  c.read("rbc.hysteresis", s.rbc.hysteresis);

  if (auto v = c.get_int("horizon")) {
    s.mpc.horizon = static_cast<std::size_t>(*v);
    s.mbrl.horizon = static_cast<std::size_t>(*v);
  }
  read_planner(c, "", s.mpc.planner);
  s.mbrl.planner = s.mpc.planner;
  read_planner(c, "mpc.", s.mpc.planner);
  read_planner(c, "mbrl.", s.mbrl.planner);
  c.read("mpc.warm_start", s.mpc.warm_start);

  c.read("exploration.epsilon0", s.mbrl.exploration.initial);
  c.read("exploration.exponent", s.mbrl.exploration.exponent);
  s.mfrl.exploration = s.mbrl.exploration;

  c.read("mbrl.capacity", s.mbrl.capacity);
  c.read("mbrl.hidden_units", s.mbrl.hidden_units);
  c.read("mbrl.hidden_layers", s.mbrl.hidden_layers);
  c.read("mbrl.epochs", s.mbrl.training.epochs);
  c.read("mbrl.batch_size", s.mbrl.training.batch_size);
  c.read("mbrl.min_samples", s.mbrl.training.min_samples);
  c.read("mbrl.holdout_fraction", s.mbrl.training.holdout_fraction);
  c.read("mbrl.learning_rate", s.mbrl.training.optimizer.learning_rate);

  c.read("mfrl.capacity", s.mfrl.capacity);
  c.read("mfrl.alpha", s.mfrl.alpha);
  c.read("mfrl.priority_offset", s.mfrl.priority_offset);
  c.read("mfrl.gamma", s.mfrl.gamma);
  c.read("mfrl.tau", s.mfrl.tau);
  c.read("mfrl.batch_size", s.mfrl.batch_size);
  c.read("mfrl.warmup", s.mfrl.warmup);
  c.read("mfrl.train_every", s.mfrl.train_every);
  c.read("mfrl.batches_per_cycle", s.mfrl.batches_per_cycle);
  c.read("mfrl.hidden_units", s.mfrl.hidden_units);
  c.read("mfrl.hidden_layers", s.mfrl.hidden_layers);
  c.read("mfrl.learning_rate", s.mfrl.optimizer.learning_rate);
  c.read("mfrl.q_trace", s.mfrl.record_q_trace);
  if (auto v = c.get("mfrl.target_rule")) {
    if (*v == "double_q") s.mfrl.rule = TargetRule::double_q;
    else if (*v == "target_argmax") s.mfrl.rule = TargetRule::target_argmax;
    else throw ParseError("unknown mfrl.target_rule: " + *v);
  }

  c.read("convergence.threshold", s.convergence_threshold);
  c.read("convergence.window_days", s.convergence_window_days);

  const auto unused = c.unused_keys();
  if (!unused.empty()) throw ConfigError(c.source() + ": unknown key '" + unused.front() + "'");
}

Scenario load_scenario(const std::filesystem::path& path) {
  Scenario s;
  apply_config(s, KeyValueConfig::load(path));
  return s;
}

namespace {

std::size_t lookahead_hours(const Scenario& s) {
  return std::max(s.mpc.horizon, s.mbrl.horizon) + 1;
}

}  // namespace

Traces make_traces(const Scenario& s) {
  const std::size_t needed = s.total_hours() + lookahead_hours(s);
  Traces t;
  if (!s.ambient_file.empty()) {
    t.ambient = load_ambient_csv(s.ambient_file);
  } else {
    const int days = static_cast<int>((needed + 23) / 24);
    t.ambient = make_synthetic_ambient(s.ambient_seed.value_or(s.seed), days, s.ambient);
  }
  if (t.ambient.size() < needed)
    throw ConfigError(s.name + ": ambient trace has " + std::to_string(t.ambient.size()) +
                      " hours, need " + std::to_string(needed));

  if (!s.tariff_file.empty()) {
    t.tariff = load_tariff_csv(s.tariff_file);
    if (t.tariff.size() < needed) throw ConfigError(s.name + ": tariff file shorter than horizon");
  } else {
    t.tariff = make_tariff(s.tariff, needed, s.tariff_config);
  }
  t.bands.reserve(needed);
  for (std::size_t h = 0; h < needed; ++h) t.bands.push_back(s.band_at(h));
  return t;
}

std::unique_ptr<Controller> make_controller(const Scenario& s, AgentKind kind) {
  switch (kind) {
    case AgentKind::rbc:
      return std::make_unique<RbcController>(s.rbc, s.grid);
    case AgentKind::mpc: {
      MpcConfig cfg = s.mpc;
      cfg.seed = s.seed;
      return std::make_unique<MpcController>(EmulatorModel(s.building, s.grid, s.backup), cfg);
    }
    case AgentKind::mbrl: {
      MbrlConfig cfg = s.mbrl;
      cfg.seed = s.seed;
      return std::make_unique<MbrlAgent>(cfg, s.grid, s.history + 1);
    }
    case AgentKind::mfrl: {
      MfrlConfig cfg = s.mfrl;
      cfg.seed = s.seed;
      return std::make_unique<MfrlAgent>(cfg, s.grid, s.history + 2);
    }
  }
  throw ConfigError("unknown agent kind");
}

EpisodeResult simulate(const Scenario& s, const Traces& t, Controller& controller) {
  using clock = std::chrono::steady_clock;
  const auto started = clock::now();
  const std::size_t total = s.total_hours();
  const std::size_t look = lookahead_hours(s);
  if (t.ambient.size() < total + look || t.tariff.size() < total + look || t.bands.size() < total + look)
    throw ConfigError(s.name + ": traces shorter than run plus lookahead");

  EpisodeResult result;
  result.log.controlled_from = static_cast<std::size_t>(s.warmup_hours);
  result.log.records.reserve(total);

  BuildingState state{s.initial_temp, s.initial_temp, 0};
  ObservedState obs = initial_state(s.initial_temp, t.ambient[0], s.history);
  const std::span<const double> amb(t.ambient.hourly_temps);
  const std::span<const double> prices(t.tariff.prices);
  const std::span<const ComfortBand> bands(t.bands);

  for (std::size_t h = 0; h < total; ++h) {
    const bool controlled = h >= static_cast<std::size_t>(s.warmup_hours);
    std::size_t action = 0;
    if (controlled) {
      DecisionContext ctx;
      ctx.hour = static_cast<std::int64_t>(h);
      ctx.controlled_hour = static_cast<std::int64_t>(h) - s.warmup_hours;
      ctx.observed = &obs;
      ctx.true_state = &state;
      ctx.lookahead = PlanningWindow{prices.subspan(h, look - 1), amb.subspan(h, look),
                                     bands.subspan(h, look - 1), s.penalty};
      const auto t0 = clock::now();
      action = controller.act(ctx);
      result.decision_seconds += std::chrono::duration<double>(clock::now() - t0).count();
      ++result.decisions;
      if (action >= s.grid.size()) throw DomainError(controller.name() + " chose an invalid action");
    }

    const auto res = step(state, s.building, amb[h], s.grid.power(action), s.backup);
    const RewardComponents r{consumption_reward(res.applied_power, prices[h]),
                             comfort_reward(res.state.indoor_temp, bands[h], s.penalty)};
    ObservedState next = advance_state(obs, res.state.indoor_temp, amb[h + 1]);

    result.log.records.push_back(StepRecord{static_cast<std::int64_t>(h), amb[h],
                                            res.state.indoor_temp, res.state.envelope_temp,
                                            res.applied_power, prices[h], r.cons, r.comfort});
    if (controlled)
      controller.observe(TransitionSample{obs, action, next, r, h + 1 == total});
    obs = std::move(next);
    state = res.state;
  }
  result.wall_seconds = std::chrono::duration<double>(clock::now() - started).count();
  return result;
}

ConvergenceEstimate estimate_convergence(const EpisodeLog& log, double threshold, int window_days) {
  const auto rows = log.controlled();
  const std::size_t days = rows.size() / 24;
  if (days < 7) throw DomainError("convergence estimate needs at least 7 controlled days");
  if (window_days < 1 || static_cast<std::size_t>(window_days) > days)
    throw DomainError("invalid convergence window");
  std::vector<double> penalty(days, 0.0);
  for (std::size_t i = 0; i < days * 24; ++i) penalty[i / 24] -= rows[i].r_comfort;

  const std::size_t w = static_cast<std::size_t>(window_days);
  const std::size_t last_start = days - w;
  std::size_t first_ok = 0;
  for (std::size_t d = 0; d <= last_start; ++d) {
    double sum = 0.0;
    for (std::size_t k = 0; k < w; ++k) sum += penalty[d + k];
    if (!(sum < threshold)) first_ok = d + 1;
  }
  ConvergenceEstimate est;
  if (first_ok > last_start) return est;
  est.converged = true;
  est.day = static_cast<std::int64_t>(first_ok) + 1;
  est.hours = static_cast<std::int64_t>(first_ok) * 24;
  return est;
}

namespace {

std::string metrics_csv(AgentKind agent, const ComparisonMetrics& m, const ConvergenceEstimate& c) {
  std::ostringstream out;
  out << "agent,consumption_change_pct,cost_change_pct,comfort_loss_eur,convergence_day,"
         "convergence_hours\n";
  out << to_string(agent) << ',' << csv::format(m.consumption_change_pct) << ','
      << csv::format(m.cost_change_pct) << ',' << csv::format(m.comfort_loss_eur) << ',' << c.day
      << ',' << c.hours << '\n';
  return out.str();
}

void finish_report(RunReport& rep, const Scenario& s) {
  rep.metrics = log_metrics(rep.agent_log, rep.baseline_log);
  if (rep.agent_log.controlled().size() / 24 >= 7) {
    rep.convergence = estimate_convergence(rep.agent_log, s.convergence_threshold,
                                           s.convergence_window_days);
    if (rep.convergence.converged) {
      const auto from = static_cast<std::size_t>(rep.convergence.hours);
      rep.post_convergence =
          log_metrics(rep.agent_log.controlled().subspan(from), rep.baseline_log.controlled().subspan(from));
    }
  }
}

RunReport run_with_baseline(const Scenario& s, const Traces& traces, AgentKind agent,
                            const EpisodeResult& baseline) {
  RunReport rep;
  rep.scenario = s.name;
  rep.agent = agent;
  rep.baseline_log = baseline.log;
  if (agent == AgentKind::rbc) {
    rep.agent_log = baseline.log;
    rep.wall_clock_seconds = baseline.wall_seconds;
    rep.decision_seconds = baseline.decision_seconds;
    rep.decisions = baseline.decisions;
  } else {
    auto controller = make_controller(s, agent);
    auto res = simulate(s, traces, *controller);
    rep.agent_log = std::move(res.log);
    rep.wall_clock_seconds = res.wall_seconds;
    rep.decision_seconds = res.decision_seconds;
    rep.decisions = res.decisions;
    if (auto* mb = dynamic_cast<MbrlAgent*>(controller.get())) rep.model_mae = mb->mae_history();
    if (auto* mf = dynamic_cast<MfrlAgent*>(controller.get()); mf && s.mfrl.record_q_trace)
      rep.q_trace = mf->q_trace();
  }
  finish_report(rep, s);
  return rep;
}

void write_report(const RunReport& rep, const Scenario& s, const std::filesystem::path& out_dir,
                  RunReport& paths_out) {
  const std::string stem = s.name + "_";
  paths_out.agent_log_path = out_dir / (stem + to_string(rep.agent) + ".csv");
  paths_out.baseline_log_path = out_dir / (stem + "rbc.csv");
  write_episode_log(rep.agent_log, paths_out.agent_log_path);
  if (rep.agent != AgentKind::rbc) write_episode_log(rep.baseline_log, paths_out.baseline_log_path);
  csv::write_file(out_dir / (stem + to_string(rep.agent) + "_metrics.csv"),
                  metrics_csv(rep.agent, rep.metrics, rep.convergence));
  if (!rep.model_mae.empty()) write_mae_csv(rep.model_mae, out_dir / (stem + "mbrl_mae.csv"));
  if (!rep.q_trace.empty()) write_q_trace_csv(rep.q_trace, out_dir / (stem + "mfrl_qtrace.csv"));
  std::ostringstream timing;
  timing << "agent,wall_clock_s,decision_s,decisions\n"
         << to_string(rep.agent) << ',' << rep.wall_clock_seconds << ',' << rep.decision_seconds
         << ',' << rep.decisions << '\n';
  csv::write_file(out_dir / (stem + to_string(rep.agent) + "_timing.csv"), timing.str());
}

}  // namespace

RunReport run_scenario(const Scenario& s, const std::filesystem::path& out_dir) {
  s.validate();
  const Traces traces = make_traces(s);
  auto rbc = make_controller(s, AgentKind::rbc);
  const EpisodeResult baseline = simulate(s, traces, *rbc);
  RunReport rep = run_with_baseline(s, traces, s.agent, baseline);
  if (!out_dir.empty()) write_report(rep, s, out_dir, rep);
  return rep;
}

SuiteConfig load_suite(const std::filesystem::path& path) {
  auto cfg = KeyValueConfig::load(path);
  SuiteConfig suite;
  if (auto v = cfg.get("agents")) {
    suite.agents.clear();
    for (auto tok : csv::split(*v)) {
      std::string name(tok);
      name.erase(std::remove(name.begin(), name.end(), ' '), name.end());
      if (!name.empty()) suite.agents.push_back(parse_agent_kind(name));
    }
  }
  if (auto v = cfg.get("seeds")) {
    suite.seeds.clear();
    for (auto tok : csv::split(*v)) {
      long long seed = 0;
      if (!csv::parse_long(tok, seed) || seed < 0) throw ParseError("bad seed in suite: " + std::string(tok));
      suite.seeds.push_back(static_cast<std::uint64_t>(seed));
    }
  }
  apply_config(suite.base, cfg);
  if (suite.agents.empty()) throw ConfigError("suite needs at least one agent");
  if (suite.seeds.empty()) throw ConfigError("suite needs at least one seed");
  return suite;
}

std::string suite_table_csv(const std::vector<SuiteRow>& rows) {
  std::ostringstream out;
  out << "agent,seed,status,consumption_change_pct,cost_change_pct,comfort_loss_eur,"
         "convergence_hours,wall_clock_s\n";
  for (const auto& r : rows) {
    out << to_string(r.agent) << ',' << r.seed << ',';
    if (!r.ok) {
      std::string msg = r.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      out << "error: " << msg << ",,,,,\n";
      continue;
    }
    out << "ok," << csv::format(r.metrics.consumption_change_pct) << ','
        << csv::format(r.metrics.cost_change_pct) << ',' << csv::format(r.metrics.comfort_loss_eur)
        << ',' << r.convergence.hours << ',' << r.wall_clock_seconds << '\n';
  }
  return out.str();
}

std::vector<SuiteRow> run_suite(const SuiteConfig& suite, const std::filesystem::path& out_dir) {
  if (suite.agents.empty()) throw ConfigError("suite needs at least one agent");
  std::vector<SuiteRow> rows;
  for (auto seed : suite.seeds) {
    Scenario s = suite.base;
    s.seed = seed;
    if (suite.seeds.size() > 1) s.name = suite.base.name + "_s" + std::to_string(seed);
    s.validate();
    const Traces traces = make_traces(s);
    auto rbc = make_controller(s, AgentKind::rbc);
    const EpisodeResult baseline = simulate(s, traces, *rbc);
    for (auto agent : suite.agents) {
      SuiteRow row;
      row.agent = agent;
      row.seed = seed;
      try {
        RunReport rep = run_with_baseline(s, traces, agent, baseline);
        if (!out_dir.empty()) write_report(rep, s, out_dir, rep);
        row.metrics = rep.metrics;
        row.convergence = rep.convergence;
        row.wall_clock_seconds = rep.wall_clock_seconds;
        row.decision_seconds = rep.decision_seconds;
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  if (!out_dir.empty()) csv::write_file(out_dir / "suite_table.csv", suite_table_csv(rows));
  return rows;
}

PlotKind parse_plot_kind(const std::string& s) {
  if (s == "temperature_trace") return PlotKind::temperature_trace;
  if (s == "action_histogram") return PlotKind::action_histogram;
  if (s == "hourly_action_heatmap") return PlotKind::hourly_action_heatmap;
  if (s == "model_mae") return PlotKind::model_mae;
  throw ParseError("unknown plot kind: " + s);
}

std::size_t nearest_action(const ActionGrid& grid, double power_w) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (std::abs(grid.power(i) - power_w) < std::abs(grid.power(best) - power_w)) best = i;
  return best;
}

std::string temperature_trace_csv(const EpisodeLog& log, const Scenario& s) {
  std::ostringstream out;
  out << "hour,t_i,t_a,band_low,band_high\n";
  for (const auto& r : log.records) {
    const auto band = s.band_at(static_cast<std::size_t>(std::max<std::int64_t>(r.hour, 0)));
    out << r.hour << ',' << csv::format(r.t_i) << ',' << csv::format(r.t_a) << ','
        << csv::format(band.t_min) << ',' << csv::format(band.t_max) << '\n';
  }
  return out.str();
}

std::string action_histogram_csv(const EpisodeLog& log, const ActionGrid& grid) {
  double max_price = 0.0;
  for (const auto& r : log.records) max_price = std::max(max_price, r.price);
  std::vector<std::size_t> total(grid.size()), low(grid.size()), high(grid.size());
  for (const auto& r : log.records) {
    const auto a = nearest_action(grid, r.power_w);
    ++total[a];
    // "high" is the peak rate; a flat tariff therefore counts everything as high
    if (r.price < max_price) ++low[a];
    else ++high[a];
  }
  std::ostringstream out;
  out << "power_w,count,count_low_price,count_high_price\n";
  for (std::size_t a = 0; a < grid.size(); ++a)
    out << csv::format(grid.power(a)) << ',' << total[a] << ',' << low[a] << ',' << high[a] << '\n';
  return out.str();
}

std::string hourly_action_heatmap_csv(const EpisodeLog& log, const ActionGrid& grid) {
  std::vector<std::vector<std::size_t>> counts(24, std::vector<std::size_t>(grid.size(), 0));
  for (const auto& r : log.records)
    ++counts[static_cast<std::size_t>(((r.hour % 24) + 24) % 24)][nearest_action(grid, r.power_w)];
  std::ostringstream out;
  out << "hour_of_day";
  for (std::size_t a = 0; a < grid.size(); ++a) out << ",p" << csv::format(grid.power(a));
  out << '\n';
  for (std::size_t h = 0; h < 24; ++h) {
    out << h;
    for (auto c : counts[h]) out << ',' << c;
    out << '\n';
  }
  return out.str();
}

std::filesystem::path emit_plot_data(PlotKind kind, const std::filesystem::path& input,
                                     const std::filesystem::path& out_dir, const Scenario& s) {
  const std::string stem = input.stem().string();
  std::filesystem::path out;
  switch (kind) {
    case PlotKind::temperature_trace: {
      out = out_dir / (stem + "_temperature_trace.csv");
      csv::write_file(out, temperature_trace_csv(read_episode_log(input), s));
      break;
    }
    case PlotKind::action_histogram: {
      out = out_dir / (stem + "_action_histogram.csv");
      csv::write_file(out, action_histogram_csv(read_episode_log(input), s.grid));
      break;
    }
    case PlotKind::hourly_action_heatmap: {
      out = out_dir / (stem + "_hourly_action_heatmap.csv");
      csv::write_file(out, hourly_action_heatmap_csv(read_episode_log(input), s.grid));
      break;
    }
    case PlotKind::model_mae: {
      const auto lines = csv::read_lines(input);
      if (lines.empty() || lines[0] != "day,holdout_mae_c")
        throw ParseError(input.string() + ": expected day,holdout_mae_c header");
      std::ostringstream o;
      o << "day,holdout_mae_c\n";
      for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto f = csv::split(lines[i]);
        long long day = 0;
        double mae = 0;
        if (f.size() != 2 || !csv::parse_long(f[0], day) || !csv::parse_double(f[1], mae))
          throw ParseError(input.string() + ":" + std::to_string(i + 1) + ": malformed row");
        o << day << ',' << csv::format(mae) << '\n';
      }
      out = out_dir / (stem + "_model_mae.csv");
      csv::write_file(out, o.str());
      break;
    }
  }
  return out;
}

}  // namespace heatrl
