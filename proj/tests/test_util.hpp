#pragma once

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "heatrl/mdp.hpp"
#include "heatrl/planners.hpp"

namespace testutil {

/// Upper-tail p-value of Pearson's chi-square statistic against expected counts.
inline double chi_square_p(const std::vector<double>& observed, const std::vector<double>& expected) {
  double stat = 0.0;
  std::size_t dof = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] <= 0.0) continue;
    const double d = observed[i] - expected[i];
    stat += d * d / expected[i];
    ++dof;
  }
  boost::math::chi_squared dist(static_cast<double>(dof - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("heatrl_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Owns the sequences a PlanningWindow points into.
struct WindowData {
  std::vector<double> prices;
  std::vector<double> ambient;
  std::vector<heatrl::ComfortBand> bands;

  WindowData(std::size_t horizon, double price, double ambient_c,
             heatrl::ComfortBand band = {})
      : prices(horizon, price), ambient(horizon + 1, ambient_c), bands(horizon, band) {}

  heatrl::PlanningWindow window() const { return {prices, ambient, bands, {}}; }
};

/// Random planning instance on the true emulator.
struct RandomInstance {
  heatrl::ModelState start;
  WindowData data;
};

inline RandomInstance random_instance(std::mt19937_64& rng, std::size_t horizon) {
  std::uniform_real_distribution<double> ti(17.0, 23.5), tm(17.0, 22.0), ta(-8.0, 12.0),
      price(0.05, 0.40);
  RandomInstance inst{{}, WindowData(horizon, 0.24, 0.0)};
  const double t_i = ti(rng), t_m = tm(rng);
  for (auto& p : inst.data.prices) p = price(rng);
  for (auto& a : inst.data.ambient) a = ta(rng);
  inst.start.latent = heatrl::BuildingState{t_i, t_m, 0};
  inst.start.observed = heatrl::initial_state(t_i, inst.data.ambient[0], 3);
  return inst;
}

}  // namespace testutil

#include "heatrl/mfrl.hpp"

namespace testutil {

/// Deterministic 2-state, 2-action chain: action a moves to state a.
struct ToyMdp {
  double reward[2][2] = {{0.0, -0.5}, {0.2, 1.0}};
  double gamma = 0.8;

  /// Value iteration to a fixed point.
  std::array<std::array<double, 2>, 2> q_star() const {
    std::array<std::array<double, 2>, 2> q{};
    for (int it = 0; it < 5000; ++it) {
      auto next = q;
      for (int s = 0; s < 2; ++s)
        for (int a = 0; a < 2; ++a) next[s][a] = reward[s][a] + gamma * std::max(q[a][0], q[a][1]);
      q = next;
    }
    return q;
  }

  static heatrl::ObservedState state(int s) { return {{static_cast<double>(s)}, 0.0}; }
};

/// Trains the fitted-Q agent on every transition of the toy MDP and returns
/// the largest deviation from the value-iteration Q-values.
inline double toy_mdp_error(const ToyMdp& mdp, std::uint64_t seed, std::size_t cycles) {
  heatrl::MfrlConfig cfg;
  cfg.seed = seed;
  cfg.gamma = mdp.gamma;
  cfg.tau = 0.05;
  cfg.batch_size = 8;
  cfg.warmup = 32;
  cfg.capacity = 64;
  cfg.batches_per_cycle = 50;
  cfg.hidden_units = 32;
  cfg.optimizer.learning_rate = 3e-3;
  heatrl::MfrlAgent agent(cfg, heatrl::ActionGrid({0.0, 1.0}), 2);
  for (int rep = 0; rep < 8; ++rep)
    for (int s = 0; s < 2; ++s)
      for (int a = 0; a < 2; ++a)
        agent.store({ToyMdp::state(s), static_cast<std::size_t>(a), ToyMdp::state(a),
                     {mdp.reward[s][a], 0.0}, false});
  for (std::size_t c = 0; c < cycles; ++c) agent.train_cycle();
  const auto q_star = mdp.q_star();
  double worst = 0.0;
  for (int s = 0; s < 2; ++s) {
    const auto q = agent.q_values(ToyMdp::state(s));
    for (int a = 0; a < 2; ++a) worst = std::max(worst, std::abs(q[a] - q_star[s][a]));
  }
  return worst;
}

}  // namespace testutil
