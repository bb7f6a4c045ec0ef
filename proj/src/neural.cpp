#include "heatrl/neural.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "heatrl/csv.hpp"
#include "heatrl/errors.hpp"

namespace heatrl::nn {

MlpSpec MlpSpec::make(std::vector<std::size_t> sizes, Activation act, std::uint64_t seed) {
  MlpSpec s;
  s.hidden_activations.assign(sizes.size() >= 2 ? sizes.size() - 2 : 0, act);
  s.layer_sizes = std::move(sizes);
  s.init_seed = seed;
  return s;
}

std::size_t MlpSpec::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l)
    n += (layer_sizes[l] + 1) * layer_sizes[l + 1];
  return n;
}

void MlpSpec::validate() const {
  if (layer_sizes.size() < 2) throw DomainError("an MLP needs at least two layers");
  for (auto s : layer_sizes)
    if (s == 0) throw DomainError("layer sizes must be >= 1");
  if (hidden_activations.size() != layer_sizes.size() - 2)
    throw DomainError("one activation per hidden layer required");
}

Mlp::Mlp(MlpSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  params_.assign(spec_.parameter_count(), 0.0);
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < spec_.layer_sizes.size(); ++l) {
    offsets_.push_back(off);
    off += (spec_.layer_sizes[l] + 1) * spec_.layer_sizes[l + 1];
  }

  std::mt19937_64 rng(spec_.init_seed);
  for (std::size_t l = 0; l + 1 < spec_.layer_sizes.size(); ++l) {
    const std::size_t fan_in = spec_.layer_sizes[l];
    const std::size_t fan_out = spec_.layer_sizes[l + 1];
    // relu layers feed the next layer with half-rectified signal, hence the factor 2
    const bool feeds_relu =
        l < spec_.hidden_activations.size() && spec_.hidden_activations[l] == Activation::relu;
    const double limit = std::sqrt((feeds_relu ? 6.0 : 3.0) / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> uni(-limit, limit);
    double* w = params_.data() + offsets_[l];
    for (std::size_t i = 0; i < fan_in * fan_out; ++i) w[i] = uni(rng);
  }
}

double& Mlp::weight(std::size_t layer, std::size_t out, std::size_t in) {
  const std::size_t fan_in = spec_.layer_sizes.at(layer);
  return params_[offsets_.at(layer) + out * fan_in + in];
}

double& Mlp::bias(std::size_t layer, std::size_t out) {
  const std::size_t fan_in = spec_.layer_sizes.at(layer);
  const std::size_t fan_out = spec_.layer_sizes.at(layer + 1);
  return params_[offsets_.at(layer) + fan_in * fan_out + out];
}

namespace {

inline double activate(Activation a, double z) {
  return a == Activation::relu ? (z > 0.0 ? z : 0.0) : std::tanh(z);
}

// derivative expressed through the pre-activation z and output y
inline double activate_grad(Activation a, double z, double y) {
  return a == Activation::relu ? (z > 0.0 ? 1.0 : 0.0) : 1.0 - y * y;
}

}  // namespace

void Mlp::forward(std::span<const double> input, ForwardCache& cache) const {
  const auto& sizes = spec_.layer_sizes;
  if (input.size() != sizes.front()) throw DomainError("input length does not match network");
  const std::size_t layers = sizes.size() - 1;
  cache.activations.resize(layers + 1);
  cache.pre_activations.resize(layers);
  cache.activations[0].assign(input.begin(), input.end());

  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t fan_in = sizes[l], fan_out = sizes[l + 1];
    const double* w = params_.data() + offsets_[l];
    const double* b = w + fan_in * fan_out;
    const auto& x = cache.activations[l];
    auto& z = cache.pre_activations[l];
    auto& y = cache.activations[l + 1];
    z.resize(fan_out);
    y.resize(fan_out);
    const bool hidden = l + 1 < layers;
    for (std::size_t o = 0; o < fan_out; ++o) {
      double acc = b[o];
      const double* row = w + o * fan_in;
      for (std::size_t i = 0; i < fan_in; ++i) acc += row[i] * x[i];
      z[o] = acc;
      y[o] = hidden ? activate(spec_.hidden_activations[l], acc) : acc;
    }
  }
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
  ForwardCache cache;
  forward(input, cache);
  return std::move(cache.activations.back());
}

void Mlp::backward(const ForwardCache& cache, std::span<const double> d_output,
                   std::span<double> grad) const {
  const auto& sizes = spec_.layer_sizes;
  const std::size_t layers = sizes.size() - 1;
  if (grad.size() != params_.size()) throw DomainError("gradient buffer size mismatch");
  if (d_output.size() != sizes.back()) throw DomainError("output gradient size mismatch");

  std::vector<double> delta(d_output.begin(), d_output.end());
  std::vector<double> prev;
  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t fan_in = sizes[l], fan_out = sizes[l + 1];
    const double* w = params_.data() + offsets_[l];
    double* gw = grad.data() + offsets_[l];
    double* gb = gw + fan_in * fan_out;
    const auto& x = cache.activations[l];
    for (std::size_t o = 0; o < fan_out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      double* grow = gw + o * fan_in;
      for (std::size_t i = 0; i < fan_in; ++i) grow[i] += d * x[i];
      gb[o] += d;
    }
    if (l == 0) break;
    prev.assign(fan_in, 0.0);
    for (std::size_t o = 0; o < fan_out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const double* row = w + o * fan_in;
      for (std::size_t i = 0; i < fan_in; ++i) prev[i] += row[i] * d;
    }
    const Activation act = spec_.hidden_activations[l - 1];
    const auto& z = cache.pre_activations[l - 1];
    for (std::size_t i = 0; i < fan_in; ++i) prev[i] *= activate_grad(act, z[i], x[i]);
    delta.swap(prev);
  }
}

Optimizer::Optimizer(OptimizerConfig cfg, std::size_t n) : cfg_(cfg) {
  if (!(cfg_.learning_rate > 0)) throw DomainError("learning rate must be positive");
  if (cfg_.kind == OptimizerConfig::Kind::adam) {
    m_.assign(n, 0.0);
    v_.assign(n, 0.0);
  }
}

void Optimizer::apply(std::span<double> params, std::span<const double> grad) {
  ++t_;
  if (cfg_.kind == OptimizerConfig::Kind::sgd) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= cfg_.learning_rate * grad[i];
    return;
  }
  if (m_.size() != params.size()) throw DomainError("optimizer state size mismatch");
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
    const double mhat = m_[i] / c1;
    const double vhat = v_[i] / c2;
    params[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
  }
}

namespace {

// Accumulates loss and gradient of the masked MSE; returns the loss.
double loss_and_gradient(const Mlp& net, std::span<const Example> batch,
                         std::vector<double>* grad) {
  if (batch.empty()) throw DomainError("empty training batch");
  const std::size_t outputs = net.spec().output_size();
  double active = 0.0;
  for (const auto& ex : batch) {
    if (ex.target.size() != outputs) throw DomainError("target length does not match network");
    if (ex.mask.empty()) {
      active += static_cast<double>(outputs);
    } else {
      if (ex.mask.size() != outputs) throw DomainError("mask length does not match network");
      for (double m : ex.mask) active += m;
    }
  }
  if (active <= 0.0) return 0.0;

  ForwardCache cache;
  std::vector<double> d_out(outputs);
  double loss = 0.0;
  for (const auto& ex : batch) {
    net.forward(ex.input, cache);
    const auto& y = cache.activations.back();
    bool any = false;
    for (std::size_t j = 0; j < outputs; ++j) {
      const double m = ex.mask.empty() ? 1.0 : ex.mask[j];
      const double err = y[j] - ex.target[j];
      loss += m * err * err;
      d_out[j] = 2.0 * m * err / active;
      any = any || m != 0.0;
    }
    if (grad && any) net.backward(cache, d_out, *grad);
  }
  return loss / active;
}

}  // namespace

double masked_mse(const Mlp& net, std::span<const Example> batch) {
  return loss_and_gradient(net, batch, nullptr);
}

double train_minibatch(Mlp& net, std::span<const Example> batch, Optimizer& opt) {
  std::vector<double> grad(net.parameter_count(), 0.0);
  const double loss = loss_and_gradient(net, batch, &grad);
  for (double g : grad)
    if (!std::isfinite(g)) throw DomainError("non-finite gradient (learning rate diverged?)");
  opt.apply(net.parameters(), grad);
  return loss;
}

namespace {

std::vector<bool> relu_pattern(const Mlp& net, std::span<const double> input) {
  ForwardCache cache;
  net.forward(input, cache);
  std::vector<bool> pattern;
  for (std::size_t l = 0; l + 1 < cache.pre_activations.size(); ++l)
    for (double z : cache.pre_activations[l]) pattern.push_back(z > 0.0);
  return pattern;
}

}  // namespace

double gradient_check(const Mlp& net, std::span<const double> input,
                      std::span<const double> target) {
  constexpr double h = 1e-5;
  const Example ex{input, target};
  const std::span<const Example> batch(&ex, 1);

  std::vector<double> analytic(net.parameter_count(), 0.0);
  loss_and_gradient(net, batch, &analytic);

  bool has_relu = std::any_of(net.spec().hidden_activations.begin(),
                              net.spec().hidden_activations.end(),
                              [](Activation a) { return a == Activation::relu; });
  const auto base_pattern = has_relu ? relu_pattern(net, input) : std::vector<bool>{};

  Mlp probe = net;
  double worst = 0.0;
  for (std::size_t i = 0; i < probe.parameter_count(); ++i) {
    const double orig = probe.parameters()[i];
    probe.parameters()[i] = orig + h;
    const double up = masked_mse(probe, batch);
    const bool kink_up = has_relu && relu_pattern(probe, input) != base_pattern;
    probe.parameters()[i] = orig - h;
    const double down = masked_mse(probe, batch);
    const bool kink_down = has_relu && relu_pattern(probe, input) != base_pattern;
    probe.parameters()[i] = orig;
    if (kink_up || kink_down) continue;

    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

Normalizer::Normalizer(std::vector<double> shift, std::vector<double> scale)
    : shift_(std::move(shift)), scale_(std::move(scale)) {
  if (shift_.size() != scale_.size()) throw DomainError("normalizer shape mismatch");
  for (double s : scale_)
    if (!(s > 0)) throw DomainError("normalizer scale must be positive");
}

Normalizer Normalizer::fit(std::span<const std::vector<double>> samples) {
  if (samples.size() < 2) throw DomainError("normalizer needs at least two samples");
  const std::size_t d = samples.front().size();
  std::vector<double> mean(d, 0.0), var(d, 0.0);
  for (const auto& s : samples) {
    if (s.size() != d) throw DomainError("inconsistent sample width");
    for (std::size_t j = 0; j < d; ++j) mean[j] += s[j];
  }
  const double n = static_cast<double>(samples.size());
  for (auto& m : mean) m /= n;
  for (const auto& s : samples)
    for (std::size_t j = 0; j < d; ++j) var[j] += (s[j] - mean[j]) * (s[j] - mean[j]);
  std::vector<double> scale(d);
  for (std::size_t j = 0; j < d; ++j) scale[j] = std::max(std::sqrt(var[j] / n), 1e-6);
  return Normalizer(std::move(mean), std::move(scale));
}

Normalizer Normalizer::identity(std::size_t features) {
  return Normalizer(std::vector<double>(features, 0.0), std::vector<double>(features, 1.0));
}

void Normalizer::apply_into(std::span<const double> x, std::span<double> out) const {
  if (x.size() != shift_.size() || out.size() != x.size())
    throw DomainError("normalizer width mismatch");
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - shift_[j]) / scale_[j];
}

std::vector<double> Normalizer::apply(std::span<const double> x) const {
  std::vector<double> out(x.size());
  apply_into(x, out);
  return out;
}

std::vector<double> Normalizer::invert(std::span<const double> z) const {
  if (z.size() != shift_.size()) throw DomainError("normalizer width mismatch");
  std::vector<double> out(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) out[j] = z[j] * scale_[j] + shift_[j];
  return out;
}

void save_parameters(const Mlp& net, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "layers";
  for (auto s : net.spec().layer_sizes) out << ' ' << s;
  out << "\nactivations";
  for (auto a : net.spec().hidden_activations) out << ' ' << (a == Activation::relu ? "relu" : "tanh");
  out << "\nseed " << net.spec().init_seed << '\n';
  for (double p : net.parameters()) out << csv::format(p) << '\n';
  csv::write_file(path, out.str());
}

Mlp load_parameters(const std::filesystem::path& path) {
  const auto lines = csv::read_lines(path);
  if (lines.size() < 3) throw ParseError(path.string() + ": truncated parameter snapshot");
  MlpSpec spec;
  {
    std::istringstream in(lines[0]);
    std::string tag;
    in >> tag;
    if (tag != "layers") throw ParseError(path.string() + ": expected layer header");
    std::size_t s;
    while (in >> s) spec.layer_sizes.push_back(s);
  }
  {
    std::istringstream in(lines[1]);
    std::string tag, a;
    in >> tag;
    if (tag != "activations") throw ParseError(path.string() + ": expected activation header");
    while (in >> a) {
      if (a == "relu") spec.hidden_activations.push_back(Activation::relu);
      else if (a == "tanh") spec.hidden_activations.push_back(Activation::tanh);
      else throw ParseError(path.string() + ": unknown activation " + a);
    }
  }
  {
    std::istringstream in(lines[2]);
    std::string tag;
    in >> tag >> spec.init_seed;
    if (tag != "seed") throw ParseError(path.string() + ": expected seed line");
  }
  Mlp net(spec);
  auto params = net.parameters();
  std::size_t k = 0;
  for (std::size_t i = 3; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    if (k >= params.size() || !csv::parse_double(lines[i], params[k]))
      throw ParseError(path.string() + ":" + std::to_string(i + 1) + ": bad parameter value");
    ++k;
  }
  if (k != params.size()) throw ParseError(path.string() + ": parameter count mismatch");
  return net;
}

}  // namespace heatrl::nn
