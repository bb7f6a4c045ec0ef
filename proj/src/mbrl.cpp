#include "heatrl/mbrl.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

#include "heatrl/csv.hpp"
#include "heatrl/errors.hpp"

namespace heatrl {

namespace {
constexpr std::size_t kHoursPerDay = 24;
}

SampleMemory::SampleMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw DomainError("memory capacity must be >= 1");
}

void SampleMemory::push(TransitionSample sample) {
  if (samples_.size() == capacity_) samples_.pop_front();
  samples_.push_back(std::move(sample));
}

double ExplorationSchedule::epsilon(std::int64_t day) const {
  if (day < 1) throw DomainError("exploration day counter starts at 1");
  return initial / std::pow(static_cast<double>(day), exponent);
}

void ExplorationSchedule::validate() const {
  if (!(initial > 0.0 && initial <= 1.0)) throw DomainError("initial epsilon must be in (0, 1]");
  if (!(exponent > 0.0)) throw DomainError("epsilon decay exponent must be > 0");
}

LearnedTransitionModel::LearnedTransitionModel(nn::MlpSpec spec, ActionGrid grid)
    : net_(std::move(spec)), grid_(std::move(grid)) {
  const std::size_t inputs = net_.spec().input_size();
  if (inputs < 3) throw DomainError("transition model needs history, ambient and power inputs");
  if (net_.spec().output_size() != 1) throw DomainError("transition model has a scalar output");
  // nominal scaling until the first fit
  std::vector<double> shift(inputs, 15.0), scale(inputs, 10.0);
  shift.back() = grid_.max_power() / 2.0;
  scale.back() = grid_.max_power() / 2.0;
  in_norm_ = nn::Normalizer(std::move(shift), std::move(scale));
}

std::vector<double> LearnedTransitionModel::input_features(const ObservedState& s,
                                                           std::size_t action) const {
  std::vector<double> x = s.features();
  x.push_back(grid_.power(action));
  if (x.size() != net_.spec().input_size())
    throw DomainError("observation width does not match transition model");
  return x;
}

double LearnedTransitionModel::predict_indoor(const ObservedState& s, std::size_t action) const {
  const auto z = in_norm_.apply(input_features(s, action));
  const double out = net_.forward(z)[0];
  return s.indoor_now() + out * delta_scale_ + delta_shift_;
}

ModelState LearnedTransitionModel::predict(const ModelState& state, std::size_t action,
                                           double ambient_next) const {
  const double next = predict_indoor(state.observed, action);
  ModelState out{advance_state(state.observed, next, ambient_next), state.latent,
                 grid_.power(action)};
  out.latent.clock += 1;
  return out;
}

void LearnedTransitionModel::set_normalizers(nn::Normalizer input, double delta_shift,
                                             double delta_scale) {
  if (input.size() != net_.spec().input_size()) throw DomainError("normalizer width mismatch");
  if (!(delta_scale > 0)) throw DomainError("delta scale must be positive");
  in_norm_ = std::move(input);
  delta_shift_ = delta_shift;
  delta_scale_ = delta_scale;
}

TrainingOutcome train_transition_model(const SampleMemory& memory, LearnedTransitionModel& model,
                                       nn::Optimizer& opt, const TransitionTrainingConfig& cfg,
                                       std::uint64_t seed) {
  TrainingOutcome outcome;
  if (memory.size() < std::max<std::size_t>(cfg.min_samples, 3)) return outcome;

  const std::size_t n = memory.size();
  std::vector<std::vector<double>> inputs(n);
  std::vector<double> deltas(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = memory[i];
    inputs[i] = model.input_features(s.s, s.a);
    deltas[i] = s.s_next.indoor_now() - s.s.indoor_now();
  }

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  std::size_t n_hold = static_cast<std::size_t>(std::ceil(cfg.holdout_fraction * static_cast<double>(n)));
  n_hold = std::clamp<std::size_t>(n_hold, 1, n - 2);
  std::vector<std::size_t> holdout(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_hold));
  std::vector<std::size_t> train(perm.begin() + static_cast<std::ptrdiff_t>(n_hold), perm.end());

  std::vector<std::vector<double>> train_inputs;
  std::vector<std::vector<double>> train_targets;
  train_inputs.reserve(train.size());
  for (auto i : train) train_inputs.push_back(inputs[i]);
  std::vector<std::vector<double>> delta_rows;
  for (auto i : train) delta_rows.push_back({deltas[i]});
  const auto dnorm = nn::Normalizer::fit(delta_rows);
  model.set_normalizers(nn::Normalizer::fit(train_inputs), dnorm.shift()[0], dnorm.scale()[0]);

  std::vector<std::vector<double>> z(train.size());
  std::vector<std::array<double, 1>> t(train.size());
  for (std::size_t k = 0; k < train.size(); ++k) {
    z[k] = model.input_normalizer().apply(inputs[train[k]]);
    t[k][0] = (deltas[train[k]] - model.delta_shift()) / model.delta_scale();
  }

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<nn::Example> batch;
  double last_loss = 0.0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t k = start; k < end; ++k) batch.push_back({z[order[k]], t[order[k]]});
      last_loss = nn::train_minibatch(model.network(), batch, opt);
    }
  }

  double abs_err = 0.0;
  for (auto i : holdout) {
    const auto& s = memory[i];
    abs_err += std::abs(model.predict_indoor(s.s, s.a) - s.s_next.indoor_now());
  }
  outcome.trained = true;
  outcome.holdout_mae = abs_err / static_cast<double>(holdout.size());
  outcome.train_mse = last_loss;
  return outcome;
}

namespace {

nn::MlpSpec transition_spec(const MbrlConfig& cfg, std::size_t history_length) {
  std::vector<std::size_t> sizes{history_length + 2};
  for (std::size_t l = 0; l < cfg.hidden_layers; ++l) sizes.push_back(cfg.hidden_units);
  sizes.push_back(1);
  return nn::MlpSpec::make(std::move(sizes), nn::Activation::tanh, cfg.seed * 2654435761ULL + 17);
}

}  // namespace

MbrlAgent::MbrlAgent(MbrlConfig cfg, ActionGrid grid, std::size_t history_length)
    : cfg_(std::move(cfg)),
      grid_(std::move(grid)),
      memory_(cfg_.capacity),
      explore_rng_(cfg_.seed * 0x9E3779B97F4A7C15ULL + 1) {
  cfg_.exploration.validate();
  learned_ = std::make_unique<LearnedTransitionModel>(transition_spec(cfg_, history_length), grid_);
  optimizer_ = std::make_unique<nn::Optimizer>(cfg_.training.optimizer,
                                               learned_->network().parameter_count());
}

MbrlAgent::MbrlAgent(MbrlConfig cfg, ActionGrid grid, std::shared_ptr<const DynamicsModel> model)
    : cfg_(std::move(cfg)),
      grid_(std::move(grid)),
      memory_(cfg_.capacity),
      injected_(std::move(model)),
      explore_rng_(cfg_.seed * 0x9E3779B97F4A7C15ULL + 1) {
  cfg_.exploration.validate();
  if (!injected_) throw DomainError("injected model must not be null");
}

const DynamicsModel& MbrlAgent::planning_model() const {
  if (injected_) return *injected_;
  return *learned_;
}

double MbrlAgent::epsilon() const {
  if (cfg_.epsilon_override >= 0.0) return cfg_.epsilon_override;
  return cfg_.exploration.epsilon(std::max<std::int64_t>(day_, 1));
}

void MbrlAgent::daily_update(const DecisionContext& ctx) {
  if (day_ > 0 && learned_) {
    last_training_ = train_transition_model(memory_, *learned_, *optimizer_, cfg_.training,
                                            cfg_.seed * 1315423911ULL + static_cast<std::uint64_t>(day_));
    if (last_training_.trained) mae_.push_back({day_ + 1, last_training_.holdout_mae});
  }
  ++day_;

  const std::size_t h = std::min(cfg_.horizon, ctx.lookahead.covered());
  ModelState start{*ctx.observed, injected_ ? *ctx.true_state : BuildingState{}, 0.0};
  const std::uint64_t seed = cfg_.seed * 7919ULL + static_cast<std::uint64_t>(ctx.hour);
  plan_ = plan(planning_model(), start, h, ctx.lookahead, cfg_.planner, seed);
}

std::size_t MbrlAgent::act(const DecisionContext& ctx) {
  if (step_in_day_ == 0) daily_update(ctx);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> random_action(0, grid_.size() - 1);
  const double u = uni(explore_rng_);
  const std::size_t r = random_action(explore_rng_);
  std::size_t a = 0;
  if (u < epsilon()) {
    a = r;
  } else if (step_in_day_ < plan_.actions.size()) {
    a = plan_.actions[step_in_day_];
  } else if (!plan_.actions.empty()) {
    a = plan_.actions.back();
  }
  step_in_day_ = (step_in_day_ + 1) % kHoursPerDay;
  return a;
}

void MbrlAgent::observe(const TransitionSample& sample) { memory_.push(sample); }

void write_mae_csv(const std::vector<DailyMae>& mae, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "day,holdout_mae_c\n";
  for (const auto& m : mae) out << m.day << ',' << csv::format(m.holdout_mae) << '\n';
  csv::write_file(path, out.str());
}

}  // namespace heatrl
