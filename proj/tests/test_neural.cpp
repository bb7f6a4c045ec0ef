#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "heatrl/errors.hpp"
#include "heatrl/neural.hpp"
#include "test_util.hpp"

using namespace heatrl;
using namespace heatrl::nn;

namespace {

Mlp zeroed(Mlp net) {
  for (double& p : net.parameters()) p = 0.0;
  return net;
}

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST(MlpSpec, ParameterCount) {
  const auto s = MlpSpec::make({5, 32, 32, 1}, Activation::tanh, 0);
  EXPECT_EQ(s.parameter_count(), 6u * 32 + 33u * 32 + 33u * 1);
  EXPECT_EQ(Mlp(s).parameter_count(), s.parameter_count());
  EXPECT_THROW(MlpSpec::make({4}, Activation::relu, 0).validate(), DomainError);
  EXPECT_THROW(MlpSpec::make({4, 0, 2}, Activation::relu, 0).validate(), DomainError);
}

TEST(Mlp, ZeroNetworkOutputsZero) {
  const Mlp net = zeroed(Mlp(MlpSpec::make({3, 8, 2}, Activation::relu, 1)));
  const std::vector<double> x{1.0, -2.0, 3.0};
  EXPECT_EQ(net.forward(x), (std::vector<double>{0.0, 0.0}));
}

TEST(Mlp, IdentityLinearLayer) {
  Mlp net = zeroed(Mlp(MlpSpec::make({3, 3}, Activation::relu, 1)));
  for (std::size_t i = 0; i < 3; ++i) net.weight(0, i, i) = 1.0;
  const std::vector<double> x{0.5, -1.5, 2.25};
  EXPECT_EQ(net.forward(x), x);
}

TEST(Mlp, ForwardIsDeterministic) {
  const Mlp a(MlpSpec::make({4, 16, 16, 6}, Activation::relu, 9));
  const Mlp b(MlpSpec::make({4, 16, 16, 6}, Activation::relu, 9));
  const std::vector<double> x{0.1, 0.2, -0.3, 0.4};
  EXPECT_EQ(a.forward(x), a.forward(x));
  EXPECT_EQ(a.forward(x), b.forward(x));
}

TEST(Mlp, RejectsShapeMismatch) {
  const Mlp net(MlpSpec::make({3, 4, 1}, Activation::tanh, 0));
  const std::vector<double> x{1.0, 2.0};
  EXPECT_THROW(net.forward(x), DomainError);
}

TEST(Mlp, InitIsFanInScaledWithZeroBias) {
  Mlp net(MlpSpec::make({10, 50, 1}, Activation::relu, 4));
  const double bound = std::sqrt(6.0 / 10.0);
  for (std::size_t o = 0; o < 50; ++o) {
    for (std::size_t i = 0; i < 10; ++i) EXPECT_LE(std::abs(net.weight(0, o, i)), bound);
    EXPECT_EQ(net.bias(0, o), 0.0);
  }
}

TEST(Training, ZeroResidualLeavesParametersUnchanged) {
  Mlp net(MlpSpec::make({2, 8, 2}, Activation::tanh, 3));
  const std::vector<double> x{0.3, -0.7};
  const auto y = net.forward(x);
  const std::vector<double> before(net.parameters().begin(), net.parameters().end());
  Optimizer opt({OptimizerConfig::Kind::sgd, 0.1}, net.parameter_count());
  const Example ex{x, y};
  EXPECT_EQ(train_minibatch(net, std::span<const Example>(&ex, 1), opt), 0.0);
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(net.parameters()[i], before[i]);
}

TEST(Training, HandComputedSgdStep) {
  // y = w·x + b; loss (y − t)²; d/dw = 2(w·x + b − t)·x = −2 at w = b = 0
  Mlp net = zeroed(Mlp(MlpSpec::make({1, 1}, Activation::relu, 0)));
  Optimizer opt({OptimizerConfig::Kind::sgd, 0.1}, net.parameter_count());
  const std::vector<double> x{1.0}, t{1.0};
  const Example ex{x, t};
  EXPECT_DOUBLE_EQ(train_minibatch(net, std::span<const Example>(&ex, 1), opt), 1.0);
  EXPECT_NEAR(net.weight(0, 0, 0), 0.2, 1e-15);
}

TEST(Training, MaskRestrictsGradientToActiveOutputs) {
  Mlp net(MlpSpec::make({2, 8, 3}, Activation::relu, 5));
  const std::vector<double> x{0.4, 0.9}, t{5.0, 5.0, 5.0}, mask{0.0, 1.0, 0.0};
  const Example ex{x, t, mask};
  // loss averages over active outputs only
  const auto y = net.forward(x);
  EXPECT_NEAR(masked_mse(net, std::span<const Example>(&ex, 1)), (y[1] - 5.0) * (y[1] - 5.0), 1e-12);
  const double bias0 = net.bias(1, 0), bias2 = net.bias(1, 2);
  Optimizer opt({OptimizerConfig::Kind::sgd, 0.01}, net.parameter_count());
  train_minibatch(net, std::span<const Example>(&ex, 1), opt);
  EXPECT_EQ(net.bias(1, 0), bias0);
  EXPECT_EQ(net.bias(1, 2), bias2);
}

TEST(Training, DescentOnFixedBatch) {
  Mlp net(MlpSpec::make({3, 32, 32, 1}, Activation::tanh, 2));
  std::mt19937_64 rng(0);
  std::vector<std::vector<double>> xs, ts;
  for (int i = 0; i < 8; ++i) {
    xs.push_back(random_vec(3, rng));
    ts.push_back({xs.back()[0] - 0.5 * xs.back()[2]});
  }
  std::vector<Example> batch;
  for (int i = 0; i < 8; ++i) batch.push_back({xs[i], ts[i]});
  Optimizer opt({OptimizerConfig::Kind::sgd, 0.01}, net.parameter_count());
  double prev = masked_mse(net, batch);
  for (int step = 0; step < 100; ++step) {
    const double pre = train_minibatch(net, batch, opt);
    EXPECT_NEAR(pre, prev, 1e-12);
    const double post = masked_mse(net, batch);
    EXPECT_LE(post, pre + 1e-12) << "step " << step;
    prev = post;
  }
}

TEST(Training, LinearDatasetDrivenBelowTolerance) {
  Mlp net(MlpSpec::make({2, 1}, Activation::relu, 8));
  std::mt19937_64 rng(1);
  std::vector<std::vector<double>> xs, ts;
  for (int i = 0; i < 16; ++i) {
    xs.push_back(random_vec(2, rng));
    ts.push_back({1.5 * xs.back()[0] - 2.0 * xs.back()[1] + 0.25});
  }
  std::vector<Example> batch;
  for (int i = 0; i < 16; ++i) batch.push_back({xs[i], ts[i]});
  Optimizer opt({OptimizerConfig::Kind::adam, 0.05}, net.parameter_count());
  for (int step = 0; step < 3000; ++step) train_minibatch(net, batch, opt);
  EXPECT_LT(masked_mse(net, batch), 1e-6);
}

TEST(Training, DivergenceIsReported) {
  Mlp net(MlpSpec::make({1, 1}, Activation::relu, 0));
  Optimizer opt({OptimizerConfig::Kind::sgd, 1e200}, net.parameter_count());
  const std::vector<double> x{1e200}, t{1.0};
  const Example ex{x, t};
  EXPECT_THROW(
      {
        for (int i = 0; i < 5; ++i) train_minibatch(net, std::span<const Example>(&ex, 1), opt);
      },
      DomainError);
}

TEST(GradientCheck, DefaultArchitectures) {
  std::mt19937_64 rng(1);
  const Mlp transition(MlpSpec::make({5, 32, 32, 1}, Activation::tanh, 1));
  EXPECT_LT(gradient_check(transition, random_vec(5, rng), random_vec(1, rng)), 1e-4);
  const Mlp q(MlpSpec::make({5, 64, 64, 6}, Activation::relu, 1));
  EXPECT_LT(gradient_check(q, random_vec(5, rng), random_vec(6, rng)), 1e-4);
}

TEST(GradientCheck, ZeroNetworkZeroTarget) {
  const Mlp net = zeroed(Mlp(MlpSpec::make({3, 4, 2}, Activation::tanh, 0)));
  const std::vector<double> x{1, 2, 3}, t{0, 0};
  const Example ex{x, t};
  std::vector<double> g(net.parameter_count(), 0.0);
  ForwardCache cache;
  net.forward(x, cache);
  const std::vector<double> d_out{0.0, 0.0};
  net.backward(cache, d_out, g);
  for (double v : g) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(gradient_check(net, x, t), 0.0);
}

TEST(Normalizer, FitApplyInvert) {
  const std::vector<std::vector<double>> s{{0.0, 7.0}, {2.0, 7.0}};
  const auto n = Normalizer::fit(s);
  EXPECT_EQ(n.shift()[0], 1.0);
  EXPECT_EQ(n.scale()[0], 1.0);
  EXPECT_EQ(n.scale()[1], 1e-6);
  const std::vector<double> x{2.0, 7.0};
  const auto z = n.apply(x);
  EXPECT_EQ(z[0], 1.0);
  EXPECT_EQ(z[1], 0.0);
  const std::vector<double> y{3.7, -1.25};
  const auto back = n.invert(n.apply(y));
  EXPECT_NEAR(back[0], y[0], 1e-12);
  EXPECT_NEAR(back[1], y[1], 1e-9);
  const std::vector<std::vector<double>> one{{1.0}};
  EXPECT_THROW(Normalizer::fit(one), DomainError);
}

TEST(Snapshot, RoundTrip) {
  const auto dir = testutil::temp_dir("snapshot");
  const Mlp net(MlpSpec::make({4, 6, 5, 2}, Activation::relu, 17));
  save_parameters(net, dir / "net.txt");
  const Mlp back = load_parameters(dir / "net.txt");
  EXPECT_EQ(back.spec().layer_sizes, net.spec().layer_sizes);
  ASSERT_EQ(back.parameter_count(), net.parameter_count());
  for (std::size_t i = 0; i < net.parameter_count(); ++i)
    EXPECT_EQ(back.parameters()[i], net.parameters()[i]);
}
