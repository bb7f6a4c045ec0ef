#include "heatrl/planners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "heatrl/errors.hpp"

namespace heatrl {

EmulatorModel::EmulatorModel(BuildingParams params, ActionGrid grid, BackupConfig backup)
    : params_(params), grid_(std::move(grid)), backup_(backup) {
  params_.validate();
  grid_.validate_against(params_.max_power);
}

ModelState EmulatorModel::predict(const ModelState& state, std::size_t action,
                                  double ambient_next) const {
  const auto res = step(state.latent, params_, state.observed.ambient_now, grid_.power(action),
                        backup_);
  return {advance_state(state.observed, res.state.indoor_temp, ambient_next), res.state,
          res.applied_power};
}

std::size_t PlanningWindow::covered() const {
  return std::min({prices.size(), ambient.size(), bands.size()});
}

double rollout_return(const DynamicsModel& model, const ModelState& start,
                      std::span<const std::size_t> actions, const PlanningWindow& window) {
  if (window.covered() < actions.size()) throw DomainError("planning window shorter than plan");
  ModelState s = start;
  double total = 0.0;
  for (std::size_t k = 0; k < actions.size(); ++k) {
    s.observed.ambient_now = window.ambient[k];
    const double next_amb = k + 1 < window.ambient.size() ? window.ambient[k + 1] : window.ambient[k];
    s = model.predict(s, actions[k], next_amb);
    total += consumption_reward(s.last_power, window.prices[k]) +
             comfort_reward(s.observed.indoor_now(), window.bands[k], window.penalty);
  }
  return total;
}

namespace {

void check_plan_args(const DynamicsModel& model, std::size_t horizon,
                     const PlanningWindow& window) {
  if (horizon == 0) throw DomainError("planning horizon must be >= 1");
  if (window.covered() < horizon) throw DomainError("planning window shorter than horizon");
  if (model.actions().size() == 0) throw DomainError("empty action grid");
}

void check_warm_start(std::span<const std::size_t> warm, std::size_t horizon,
                      std::size_t actions) {
  if (warm.empty()) return;
  if (warm.size() != horizon) throw DomainError("warm start length differs from horizon");
  for (auto a : warm)
    if (a >= actions) throw DomainError("warm start action out of range");
}

std::size_t sample_categorical(std::span<const double> probs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double u = uni(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

}  // namespace

std::size_t CemConfig::elite_count() const {
  return static_cast<std::size_t>(std::floor(static_cast<double>(population) * elite_fraction));
}

void CemConfig::validate() const {
  if (population == 0 || iterations == 0) throw DomainError("CEM population/iterations must be >= 1");
  if (elite_count() == 0) throw DomainError("CEM elite count is zero");
  if (elite_count() > population) throw DomainError("CEM elite count exceeds population");
  if (!(smoothing >= 0.0 && smoothing < 1.0)) throw DomainError("CEM smoothing must be in [0, 1)");
  if (!(min_mix >= 0.0 && min_mix < 1.0)) throw DomainError("CEM uniform mix must be in [0, 1)");
}

Plan plan_cem(const DynamicsModel& model, const ModelState& start, std::size_t horizon,
              const PlanningWindow& window, const CemConfig& cfg,
              std::span<const std::size_t> warm_start) {
  cfg.validate();
  check_plan_args(model, horizon, window);
  const std::size_t n_actions = model.actions().size();
  check_warm_start(warm_start, horizon, n_actions);

  std::mt19937_64 rng(cfg.seed);
  // probs[k * n_actions + a]
  std::vector<double> probs(horizon * n_actions, 1.0 / static_cast<double>(n_actions));
  Plan best;
  best.expected_return = -std::numeric_limits<double>::infinity();

  if (!warm_start.empty()) {
    for (std::size_t k = 0; k < horizon; ++k) {
      for (std::size_t a = 0; a < n_actions; ++a)
        probs[k * n_actions + a] = 0.5 / static_cast<double>(n_actions);
      probs[k * n_actions + warm_start[k]] += 0.5;
    }
    best.actions.assign(warm_start.begin(), warm_start.end());
    best.expected_return = rollout_return(model, start, best.actions, window);
  }

  const std::size_t elites = cfg.elite_count();
  std::vector<std::vector<std::size_t>> samples(cfg.population,
                                                std::vector<std::size_t>(horizon));
  std::vector<double> returns(cfg.population);
  std::vector<std::size_t> order(cfg.population);
  std::vector<double> freq(horizon * n_actions);

  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    for (std::size_t i = 0; i < cfg.population; ++i) {
      for (std::size_t k = 0; k < horizon; ++k)
        samples[i][k] = sample_categorical(
            std::span<const double>(probs).subspan(k * n_actions, n_actions), rng);
      returns[i] = rollout_return(model, start, samples[i], window);
      if (returns[i] > best.expected_return) {
        best.expected_return = returns[i];
        best.actions = samples[i];
      }
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return returns[a] > returns[b]; });

    // elites are the best distinct sequences; repeats would collapse the fit
    std::fill(freq.begin(), freq.end(), 0.0);
    std::size_t taken = 0;
    for (std::size_t r = 0; r < order.size() && taken < elites; ++r) {
      const auto& cand = samples[order[r]];
      bool repeat = false;
      for (std::size_t q = 0; q < r && !repeat; ++q) repeat = samples[order[q]] == cand;
      if (repeat) continue;
      for (std::size_t k = 0; k < horizon; ++k) freq[k * n_actions + cand[k]] += 1.0;
      ++taken;
    }
    for (std::size_t j = 0; j < probs.size(); ++j)
      probs[j] = cfg.smoothing * probs[j] +
                 (1.0 - cfg.smoothing) * freq[j] / static_cast<double>(taken);
    // mix in a little uniform mass so no action's probability reaches zero
    const double uniform = 1.0 / static_cast<double>(n_actions);
    for (double& pj : probs) pj = (1.0 - cfg.min_mix) * pj + cfg.min_mix * uniform;
  }
  return best;
}

void GaConfig::validate() const {
  if (population == 0) throw DomainError("GA population must be >= 1");
  if (tournament_size == 0) throw DomainError("GA tournament size must be >= 1");
  if (!(crossover_rate >= 0 && crossover_rate <= 1)) throw DomainError("GA crossover rate outside [0,1]");
  if (!(mutation_rate >= 0 && mutation_rate <= 1)) throw DomainError("GA mutation rate outside [0,1]");
}

namespace {

const Genome& tournament(const std::vector<Genome>& pop, std::size_t size, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
  const Genome* winner = &pop[pick(rng)];
  for (std::size_t i = 1; i < size; ++i) {
    const Genome& c = pop[pick(rng)];
    if (c.fitness > winner->fitness) winner = &c;
  }
  return *winner;
}

std::size_t best_index(const std::vector<Genome>& pop) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < pop.size(); ++i)
    if (pop[i].fitness > pop[best].fitness) best = i;
  return best;
}

}  // namespace

std::vector<Genome> ga_next_generation(const DynamicsModel& model, const ModelState& start,
                                       const PlanningWindow& window,
                                       const std::vector<Genome>& population,
                                       const GaConfig& cfg, std::mt19937_64& rng) {
  if (population.empty()) throw DomainError("empty GA population");
  const std::size_t n_actions = model.actions().size();
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> gene(0, n_actions - 1);

  std::vector<Genome> next;
  next.reserve(population.size());
  next.push_back(population[best_index(population)]);
  while (next.size() < population.size()) {
    const Genome& p1 = tournament(population, cfg.tournament_size, rng);
    const Genome& p2 = tournament(population, cfg.tournament_size, rng);
    Genome child;
    child.genes = p1.genes;
    if (uni(rng) < cfg.crossover_rate)
      for (std::size_t k = 0; k < child.genes.size(); ++k)
        if (uni(rng) < 0.5) child.genes[k] = p2.genes[k];
    // a mutated gene always moves to a different level
    std::uniform_int_distribution<std::size_t> other(1, n_actions > 1 ? n_actions - 1 : 1);
    for (auto& g : child.genes)
      if (n_actions > 1 && uni(rng) < cfg.mutation_rate) g = (g + other(rng)) % n_actions;
    // a copy of an existing member gets one forced mutation to keep diversity
    if (n_actions > 1 && cfg.mutation_rate > 0.0 && !child.genes.empty() &&
        std::any_of(next.begin(), next.end(), [&](const Genome& g) { return g.genes == child.genes; })) {
      std::uniform_int_distribution<std::size_t> locus(0, child.genes.size() - 1);
      auto& g = child.genes[locus(rng)];
      g = (g + other(rng)) % n_actions;
    }
    child.fitness = rollout_return(model, start, child.genes, window);
    next.push_back(std::move(child));
  }
  return next;
}

Plan plan_ga(const DynamicsModel& model, const ModelState& start, std::size_t horizon,
             const PlanningWindow& window, const GaConfig& cfg,
             std::span<const std::size_t> warm_start, std::vector<Genome>* final_population,
             const std::vector<Genome>* initial) {
  cfg.validate();
  check_plan_args(model, horizon, window);
  const std::size_t n_actions = model.actions().size();
  check_warm_start(warm_start, horizon, n_actions);

  std::mt19937_64 rng(cfg.seed);
  std::vector<Genome> pop;
  if (initial && !initial->empty()) {
    pop = *initial;
    for (auto& g : pop) {
      if (g.genes.size() != horizon) throw DomainError("initial genome length differs from horizon");
      g.fitness = rollout_return(model, start, g.genes, window);
    }
  } else {
    std::uniform_int_distribution<std::size_t> gene(0, n_actions - 1);
    pop.resize(cfg.population);
    for (std::size_t i = 0; i < pop.size(); ++i) {
      if (i == 0 && !warm_start.empty()) {
        pop[i].genes.assign(warm_start.begin(), warm_start.end());
      } else {
        pop[i].genes.resize(horizon);
        for (auto& g : pop[i].genes) g = gene(rng);
      }
      pop[i].fitness = rollout_return(model, start, pop[i].genes, window);
    }
  }

  Genome best = pop[best_index(pop)];
  for (std::size_t gen = 0; gen < cfg.generations; ++gen) {
    pop = ga_next_generation(model, start, window, pop, cfg, rng);
    const Genome& top = pop[best_index(pop)];
    if (top.fitness > best.fitness) best = top;
  }
  if (final_population) *final_population = pop;
  return Plan{best.genes, best.fitness};
}

Plan plan_exhaustive(const DynamicsModel& model, const ModelState& start, std::size_t horizon,
                     const PlanningWindow& window, std::size_t cap) {
  check_plan_args(model, horizon, window);
  const auto& grid = model.actions();
  const std::size_t n_actions = grid.size();
  double count = std::pow(static_cast<double>(n_actions), static_cast<double>(horizon));
  if (count > static_cast<double>(cap))
    throw DomainError("exhaustive search space exceeds cap");

  std::vector<std::size_t> seq(horizon, 0);
  Plan best;
  double best_energy = std::numeric_limits<double>::infinity();
  best.expected_return = -std::numeric_limits<double>::infinity();
  const auto total = static_cast<std::size_t>(count);
  for (std::size_t n = 0; n < total; ++n) {
    const double ret = rollout_return(model, start, seq, window);
    double energy = 0.0;
    for (auto a : seq) energy += grid.power(a);
    const double tol = 1e-12 * std::max(1.0, std::abs(ret));
    const bool better = ret > best.expected_return + tol;
    const bool tie = std::abs(ret - best.expected_return) <= tol;
    // enumeration order is lexicographic, so an exact tie keeps the earlier one
    if (better || (tie && energy < best_energy)) {
      best.expected_return = ret;
      best.actions = seq;
      best_energy = energy;
    }
    for (std::size_t k = horizon; k-- > 0;) {
      if (++seq[k] < n_actions) break;
      seq[k] = 0;
    }
  }
  return best;
}

PlannerKind parse_planner_kind(const std::string& s) {
  if (s == "cem") return PlannerKind::cem;
  if (s == "ga") return PlannerKind::ga;
  if (s == "exhaustive") return PlannerKind::exhaustive;
  throw ParseError("unknown planner: " + s);
}

Plan plan(const DynamicsModel& model, const ModelState& start, std::size_t horizon,
          const PlanningWindow& window, const PlannerConfig& cfg, std::uint64_t seed,
          std::span<const std::size_t> warm_start) {
  switch (cfg.kind) {
    case PlannerKind::cem: {
      CemConfig c = cfg.cem;
      c.seed = seed;
      return plan_cem(model, start, horizon, window, c, warm_start);
    }
    case PlannerKind::ga: {
      GaConfig g = cfg.ga;
      g.seed = seed;
      return plan_ga(model, start, horizon, window, g, warm_start);
    }
    case PlannerKind::exhaustive:
      return plan_exhaustive(model, start, horizon, window, cfg.exhaustive_cap);
  }
  throw DomainError("unknown planner kind");
}

}  // namespace heatrl
