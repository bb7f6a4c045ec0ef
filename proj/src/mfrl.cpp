#include "heatrl/mfrl.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "heatrl/csv.hpp"
#include "heatrl/errors.hpp"

namespace heatrl {

SumTree::SumTree(std::size_t leaves) : leaves_(leaves) {
  while (base_ < leaves_) base_ <<= 1;
  nodes_.assign(2 * base_, 0.0);
}

void SumTree::set(std::size_t leaf, double weight) {
  if (leaf >= leaves_) throw DomainError("sum tree leaf out of range");
  if (!(weight >= 0.0) || !std::isfinite(weight)) throw DomainError("sum tree weight must be finite and >= 0");
  std::size_t node = base_ + leaf;
  nodes_[node] = weight;
  for (node >>= 1; node >= 1; node >>= 1) nodes_[node] = nodes_[2 * node] + nodes_[2 * node + 1];
}

std::size_t SumTree::find(double mass) const {
  if (!(total() > 0.0)) throw DomainError("sum tree is empty");
  std::size_t node = 1;
  while (node < base_) {
    const double left = nodes_[2 * node];
    if (mass < left) {
      node = 2 * node;
    } else {
      mass -= left;
      node = 2 * node + 1;
    }
  }
  std::size_t leaf = node - base_;
  if (leaf < leaves_ && nodes_[node] > 0.0) return leaf;
  // rounding pushed us onto an empty leaf: take the nearest weighted one
  for (std::size_t d = 1; d < leaves_; ++d) {
    if (leaf >= d && nodes_[base_ + leaf - d] > 0.0) return leaf - d;
    if (leaf + d < leaves_ && nodes_[base_ + leaf + d] > 0.0) return leaf + d;
  }
  throw DomainError("sum tree has no positive leaf");
}

PrioritizedReplay::PrioritizedReplay(std::size_t capacity, double alpha, double offset)
    : capacity_(capacity), alpha_(alpha), offset_(offset), tree_(capacity) {
  if (capacity_ == 0) throw DomainError("replay capacity must be >= 1");
  if (!(alpha_ >= 0.0)) throw DomainError("priority exponent must be >= 0");
  if (!(offset_ > 0.0)) throw DomainError("priority offset must be > 0");
  samples_.resize(capacity_);
  priorities_.assign(capacity_, 0.0);
}

std::size_t PrioritizedReplay::push(TransitionSample sample, double priority) {
  const std::size_t slot = next_;
  samples_[slot] = std::move(sample);
  update_priority(slot, priority);
  next_ = (next_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
  return slot;
}

void PrioritizedReplay::update_priority(std::size_t slot, double priority) {
  if (slot >= capacity_) throw DomainError("replay slot out of range");
  // priorities never fall below the offset
  priority = std::max(priority, offset_);
  priorities_[slot] = priority;
  tree_.set(slot, std::pow(priority, alpha_));
}

double PrioritizedReplay::probability(std::size_t slot) const {
  return tree_.get(slot) / tree_.total();
}

std::vector<std::size_t> PrioritizedReplay::sample(std::size_t batch, std::mt19937_64& rng) {
  if (batch == 0) throw DomainError("batch size must be >= 1");
  if (size_ < batch) throw DomainError("replay memory smaller than batch size");
  std::vector<std::size_t> picked;
  std::vector<double> removed;
  picked.reserve(batch);
  removed.reserve(batch);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t slot = tree_.find(uni(rng) * tree_.total());
    picked.push_back(slot);
    removed.push_back(tree_.get(slot));
    tree_.set(slot, 0.0);
  }
  for (std::size_t b = 0; b < batch; ++b) tree_.set(picked[b], removed[b]);
  return picked;
}

double compute_priority(double target, double q_sa, double offset) {
  return std::abs(target - q_sa) + offset;
}

QPair::QPair(nn::Mlp net, double tau_, double gamma_)
    : online(net), target(std::move(net)), tau(tau_), gamma(gamma_) {
  if (!(tau > 0.0 && tau <= 1.0)) throw DomainError("tau must be in (0, 1]");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw DomainError("gamma must be in [0, 1)");
}

void soft_update(QPair& pair) {
  auto w = pair.online.parameters();
  auto wt = pair.target.parameters();
  if (w.size() != wt.size()) throw DomainError("Q networks differ in shape");
  for (std::size_t i = 0; i < w.size(); ++i) wt[i] = pair.tau * w[i] + (1.0 - pair.tau) * wt[i];
}

std::size_t argmax_lowest(std::span<const double> values) {
  if (values.empty()) throw DomainError("argmax of an empty set");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

double q_target(double reward, bool terminal, std::span<const double> next_features,
                const QPair& pair, TargetRule rule) {
  if (terminal) return reward;
  const auto q_target_next = pair.target.forward(next_features);
  std::size_t a_star;
  if (rule == TargetRule::double_q) {
    a_star = argmax_lowest(pair.online.forward(next_features));
  } else {
    a_star = argmax_lowest(q_target_next);
  }
  return reward + pair.gamma * q_target_next[a_star];
}

namespace {

nn::MlpSpec q_spec(const MfrlConfig& cfg, std::size_t features, std::size_t actions) {
  std::vector<std::size_t> sizes{features};
  for (std::size_t l = 0; l < cfg.hidden_layers; ++l) sizes.push_back(cfg.hidden_units);
  sizes.push_back(actions);
  return nn::MlpSpec::make(std::move(sizes), nn::Activation::relu, cfg.seed * 40503ULL + 3);
}

}  // namespace

MfrlAgent::MfrlAgent(MfrlConfig cfg, ActionGrid grid, std::size_t feature_count)
    : cfg_(std::move(cfg)),
      grid_(std::move(grid)),
      pair_(nn::Mlp(q_spec(cfg_, feature_count, grid_.size())), cfg_.tau, cfg_.gamma),
      opt_(cfg_.optimizer, pair_.online.parameter_count()),
      replay_(cfg_.capacity, cfg_.alpha, cfg_.priority_offset),
      norm_(std::vector<double>(feature_count, 15.0), std::vector<double>(feature_count, 10.0)),
      rng_(cfg_.seed * 0xD1B54A32D192ED03ULL + 5) {
  cfg_.exploration.validate();
  if (cfg_.batch_size == 0 || cfg_.train_every == 0) throw DomainError("batch size and cadence must be >= 1");
}

std::vector<double> MfrlAgent::features(const ObservedState& s) const {
  return norm_.apply(s.features());
}

std::vector<double> MfrlAgent::q_values(const ObservedState& s) const {
  return pair_.online.forward(features(s));
}

double MfrlAgent::epsilon(std::int64_t controlled_hour) const {
  if (cfg_.epsilon_override >= 0.0) return cfg_.epsilon_override;
  return cfg_.exploration.epsilon(std::max<std::int64_t>(controlled_hour, 0) / 24 + 1);
}

std::size_t MfrlAgent::select_action(const ObservedState& s, double eps) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> random_action(0, grid_.size() - 1);
  const double u = uni(rng_);
  const std::size_t r = random_action(rng_);
  if (u < eps) return r;
  return argmax_lowest(q_values(s));
}

std::size_t MfrlAgent::act(const DecisionContext& ctx) {
  const std::size_t a = select_action(*ctx.observed, epsilon(ctx.controlled_hour));
  if (cfg_.record_q_trace) trace_.push_back({ctx.hour, q_values(*ctx.observed), a});
  return a;
}

double MfrlAgent::target_for(const TransitionSample& s) const {
  return q_target(s.r.total(), s.terminal, features(s.s_next), pair_, cfg_.rule);
}

void MfrlAgent::store(const TransitionSample& sample) {
  const double tg = target_for(sample);
  const double q = q_values(sample.s)[sample.a];
  replay_.push(sample, compute_priority(tg, q, cfg_.priority_offset));
}

void MfrlAgent::observe(const TransitionSample& sample) {
  store(sample);
  if (++since_train_ >= cfg_.train_every) {
    since_train_ = 0;
    train_cycle();
  }
}

bool MfrlAgent::train_cycle() {
  if (replay_.size() < std::max(cfg_.warmup, cfg_.batch_size)) return false;
  if (!normalizer_fitted_) {
    std::vector<std::vector<double>> states;
    states.reserve(replay_.size());
    for (std::size_t i = 0; i < replay_.size(); ++i) states.push_back(replay_[i].s.features());
    norm_ = nn::Normalizer::fit(states);
    normalizer_fitted_ = true;
  }

  const std::size_t n_actions = grid_.size();
  std::vector<std::vector<double>> inputs(cfg_.batch_size);
  std::vector<std::vector<double>> targets(cfg_.batch_size, std::vector<double>(n_actions, 0.0));
  std::vector<std::vector<double>> masks(cfg_.batch_size, std::vector<double>(n_actions, 0.0));
  std::vector<nn::Example> batch(cfg_.batch_size);

  for (std::size_t b = 0; b < cfg_.batches_per_cycle; ++b) {
    const auto slots = replay_.sample(cfg_.batch_size, rng_);
    for (std::size_t k = 0; k < slots.size(); ++k) {
      const auto& s = replay_[slots[k]];
      inputs[k] = features(s.s);
      std::fill(masks[k].begin(), masks[k].end(), 0.0);
      masks[k][s.a] = 1.0;
      targets[k][s.a] = target_for(s);
      batch[k] = {inputs[k], targets[k], masks[k]};
    }
    nn::train_minibatch(pair_.online, batch, opt_);
    soft_update(pair_);
    for (auto slot : slots) {
      const auto& s = replay_[slot];
      replay_.update_priority(slot, compute_priority(target_for(s), q_values(s.s)[s.a],
                                                     cfg_.priority_offset));
    }
  }
  ++cycles_;
  return true;
}

void write_q_trace_csv(const std::vector<QTraceRow>& rows, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "hour";
  const std::size_t width = rows.empty() ? 6 : rows.front().q.size();
  for (std::size_t j = 0; j < width; ++j) out << ",q" << j;
  out << ",chosen\n";
  for (const auto& r : rows) {
    out << r.hour;
    for (double q : r.q) out << ',' << csv::format(q);
    out << ',' << r.chosen << '\n';
  }
  csv::write_file(path, out.str());
}

}  // namespace heatrl
