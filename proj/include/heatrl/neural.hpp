#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace heatrl::nn {

enum class Activation { relu, tanh };

/// Dense feed-forward network shape. `hidden_activations` has one entry per
/// hidden layer (layer_sizes.size() - 2); the output layer is linear.
struct MlpSpec {
  std::vector<std::size_t> layer_sizes;
  std::vector<Activation> hidden_activations;
  std::uint64_t init_seed = 0;

  /// Uniform activation across all hidden layers.
  static MlpSpec make(std::vector<std::size_t> sizes, Activation act, std::uint64_t seed);

  std::size_t input_size() const { return layer_sizes.front(); }
  std::size_t output_size() const { return layer_sizes.back(); }
  std::size_t parameter_count() const;
  void validate() const;
};

/// Per-layer activations retained from a forward pass for backprop.
struct ForwardCache {
  std::vector<std::vector<double>> activations;  // [0] = input, back() = output
  std::vector<std::vector<double>> pre_activations;
};

class Mlp {
 public:
  Mlp() = default;
  /// Fan-in scaled uniform weights drawn from spec.init_seed, zero biases.
  explicit Mlp(MlpSpec spec);

  const MlpSpec& spec() const { return spec_; }
  std::size_t parameter_count() const { return params_.size(); }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  /// Layer l maps layer_sizes[l] -> layer_sizes[l+1]; weights are row-major
  /// [out][in] followed by the biases.
  double& weight(std::size_t layer, std::size_t out, std::size_t in);
  double& bias(std::size_t layer, std::size_t out);

  std::vector<double> forward(std::span<const double> input) const;
  void forward(std::span<const double> input, ForwardCache& cache) const;

  /// Adds d(loss)/d(params) to `grad` given d(loss)/d(output).
  void backward(const ForwardCache& cache, std::span<const double> d_output,
                std::span<double> grad) const;

 private:
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }

  MlpSpec spec_;
  std::vector<double> params_;
  std::vector<std::size_t> offsets_;
};

struct OptimizerConfig {
  enum class Kind { sgd, adam };
  Kind kind = Kind::adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(OptimizerConfig cfg, std::size_t parameter_count);

  void apply(std::span<double> params, std::span<const double> grad);
  const OptimizerConfig& config() const { return cfg_; }
  std::uint64_t steps() const { return t_; }

 private:
  OptimizerConfig cfg_;
  std::vector<double> m_, v_;
  std::uint64_t t_ = 0;
};

/// One training example. An empty mask trains every output; otherwise only
/// outputs with a non-zero mask entry contribute.
struct Example {
  std::span<const double> input;
  std::span<const double> target;
  std::span<const double> mask = {};
};

/// Masked mean squared error over the batch (mean over active outputs).
double masked_mse(const Mlp& net, std::span<const Example> batch);

/// One gradient step on masked MSE. Returns the loss before the step.
/// Throws DomainError if the gradient is not finite.
double train_minibatch(Mlp& net, std::span<const Example> batch, Optimizer& opt);

/// Largest relative error between backprop gradients and central finite
/// differences (step 1e-5) of the MSE loss over all parameters. For relu
/// nets, parameters whose perturbation flips a unit across its kink are
/// skipped.
double gradient_check(const Mlp& net, std::span<const double> input,
                      std::span<const double> target);

class Normalizer {
 public:
  Normalizer() = default;
  Normalizer(std::vector<double> shift, std::vector<double> scale);

  /// Per-feature mean and population std-dev (clamped to >= 1e-6).
  static Normalizer fit(std::span<const std::vector<double>> samples);
  static Normalizer identity(std::size_t features);

  std::vector<double> apply(std::span<const double> x) const;
  void apply_into(std::span<const double> x, std::span<double> out) const;
  std::vector<double> invert(std::span<const double> z) const;

  std::size_t size() const { return shift_.size(); }
  const std::vector<double>& shift() const { return shift_; }
  const std::vector<double>& scale() const { return scale_; }

 private:
  std::vector<double> shift_;
  std::vector<double> scale_;
};

/// Text snapshot: layer sizes, activations, then every parameter.
void save_parameters(const Mlp& net, const std::filesystem::path& path);
Mlp load_parameters(const std::filesystem::path& path);

}  // namespace heatrl::nn
