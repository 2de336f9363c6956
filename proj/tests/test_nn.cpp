#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "novex/errors.hpp"
#include "novex/nn.hpp"

namespace {

using novex::Rng;
using novex::nn::Activation;
using novex::nn::DenseNet;

double objective(const DenseNet& net, const Eigen::VectorXd& x, const Eigen::VectorXd& g) {
  return novex::nn::forward(net, x).dot(g);
}

double relative_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-6});
  return std::abs(a - b) / scale;
}

DenseNet random_net(Rng& rng) {
  const auto in = static_cast<Eigen::Index>(1 + novex::uniform_index(rng, 5));
  const auto out = static_cast<Eigen::Index>(1 + novex::uniform_index(rng, 4));
  std::vector<Eigen::Index> hidden;
  const auto depth = novex::uniform_index(rng, 3);
  for (std::size_t i = 0; i < depth; ++i) {
    hidden.push_back(static_cast<Eigen::Index>(2 + novex::uniform_index(rng, 6)));
  }
  const Activation output = novex::bernoulli(rng, 0.5) ? Activation::kTanh : Activation::kIdentity;
  DenseNet net = DenseNet::mlp(in, hidden, out, output, rng);
  for (auto& layer : net.layers()) {
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = novex::uniform(rng, -0.5, 0.5);
    if (novex::bernoulli(rng, 0.3) && &layer != &net.layers().back()) {
      layer.activation = Activation::kTanh;
    }
  }
  return net;
}

TEST(DenseNet, GradientMatchesCentralDifferences) {
  Rng rng(2024);
  const double h = 1e-6;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    DenseNet net = random_net(rng);
    Eigen::VectorXd x(net.in_dim());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = novex::uniform(rng, -1.0, 1.0);
    Eigen::VectorXd g(net.out_dim());
    for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = novex::uniform(rng, -1.0, 1.0);

    const auto grads = novex::nn::backward(net, x, g);
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
      auto& w = net.layers()[l].weight;
      for (Eigen::Index r = 0; r < w.rows(); ++r) {
        for (Eigen::Index c = 0; c < w.cols(); ++c) {
          const double keep = w(r, c);
          w(r, c) = keep + h;
          const double up = objective(net, x, g);
          w(r, c) = keep - h;
          const double down = objective(net, x, g);
          w(r, c) = keep;
          const double numeric = (up - down) / (2 * h);
          const double analytic = grads.weight[l](r, c);
          if (std::abs(numeric) < 1e-7 && std::abs(analytic) < 1e-7) continue;
          worst = std::max(worst, relative_error(analytic, numeric));
        }
      }
      auto& b = net.layers()[l].bias;
      for (Eigen::Index r = 0; r < b.size(); ++r) {
        const double keep = b(r);
        b(r) = keep + h;
        const double up = objective(net, x, g);
        b(r) = keep - h;
        const double down = objective(net, x, g);
        b(r) = keep;
        const double numeric = (up - down) / (2 * h);
        const double analytic = grads.bias[l](r);
        if (std::abs(numeric) < 1e-7 && std::abs(analytic) < 1e-7) continue;
        worst = std::max(worst, relative_error(analytic, numeric));
      }
    }
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(DenseNet, BatchBackwardSumsColumnsAndReturnsInputGradient) {
  Rng rng(7);
  DenseNet net = DenseNet::mlp(3, {5, 4}, 2, Activation::kTanh, rng);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 6);
  Eigen::MatrixXd g = Eigen::MatrixXd::Random(2, 6);

  novex::nn::ForwardCache cache;
  const Eigen::MatrixXd y = novex::nn::forward_batch(net, x, &cache);
  Eigen::MatrixXd input_grad;
  const auto batch = novex::nn::backward_batch(net, cache, g, &input_grad);

  auto summed = novex::nn::GradientSet::zeros_like(net);
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    EXPECT_NEAR((y.col(c) - novex::nn::forward(net, x.col(c))).norm(), 0.0, 1e-12);
    summed += novex::nn::backward(net, x.col(c), g.col(c));
  }
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    EXPECT_NEAR((summed.weight[l] - batch.weight[l]).norm(), 0.0, 1e-10);
    EXPECT_NEAR((summed.bias[l] - batch.bias[l]).norm(), 0.0, 1e-10);
  }

  const double h = 1e-6;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      Eigen::VectorXd up = x.col(c);
      Eigen::VectorXd down = x.col(c);
      up(i) += h;
      down(i) -= h;
      const double numeric =
          (objective(net, up, g.col(c)) - objective(net, down, g.col(c))) / (2 * h);
      EXPECT_LT(relative_error(input_grad(i, c), numeric), 1e-5);
    }
  }
}

TEST(DenseNet, RejectsLayersThatDoNotChain) {
  novex::nn::DenseLayer a{Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Zero(3)};
  novex::nn::DenseLayer b{Eigen::MatrixXd::Zero(1, 4), Eigen::VectorXd::Zero(1)};
  EXPECT_THROW(DenseNet({a, b}), novex::ConfigError);
}

TEST(Mse, LossAndGradient) {
  const auto r = novex::nn::mse_grad(Eigen::Vector2d(1.0, 3.0), Eigen::Vector2d(0.0, 1.0));
  EXPECT_DOUBLE_EQ(r.loss, 2.5);
  EXPECT_DOUBLE_EQ(r.grad(0), 1.0);
  EXPECT_DOUBLE_EQ(r.grad(1), 2.0);
}

TEST(RmsProp, SingleStepMatchesHandComputation) {
  novex::nn::DenseLayer layer{Eigen::MatrixXd::Constant(1, 1, 1.0), Eigen::VectorXd::Zero(1)};
  DenseNet net({layer});
  auto state = novex::nn::RmsPropState::for_net(net, 0.9, 1e-8);
  auto grads = novex::nn::GradientSet::zeros_like(net);
  grads.weight[0](0, 0) = 2.0;
  grads.bias[0](0) = -1.0;
  novex::nn::rmsprop_step(net, grads, state, 0.01);
  // accumulator = 0.1 g^2, step = lr g / (sqrt(acc) + eps)
  const double w_step = 0.01 * 2.0 / (std::sqrt(0.4) + 1e-8);
  const double b_step = 0.01 * -1.0 / (std::sqrt(0.1) + 1e-8);
  EXPECT_NEAR(net.layers()[0].weight(0, 0), 1.0 - w_step, 1e-15);
  EXPECT_NEAR(net.layers()[0].bias(0), -b_step, 1e-15);
  EXPECT_NEAR(state.weight_sq[0](0, 0), 0.4, 1e-15);
}

TEST(RmsProp, NonFiniteGradientThrowsAndLeavesWeights) {
  Rng rng(1);
  DenseNet net = DenseNet::mlp(2, {3}, 1, Activation::kIdentity, rng);
  const DenseNet before = net;
  auto state = novex::nn::RmsPropState::for_net(net);
  auto grads = novex::nn::GradientSet::zeros_like(net);
  grads.bias[1](0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(novex::nn::rmsprop_step(net, grads, state, 0.1), novex::DivergenceError);
  EXPECT_TRUE(net == before);
}

TEST(Polyak, BlendsAndCopies) {
  novex::nn::DenseLayer a{Eigen::MatrixXd::Constant(1, 1, 4.0), Eigen::VectorXd::Constant(1, 2.0)};
  novex::nn::DenseLayer b{Eigen::MatrixXd::Constant(1, 1, 0.0), Eigen::VectorXd::Constant(1, 0.0)};
  DenseNet online({a});
  DenseNet target({b});
  novex::nn::polyak_update(target, online, 0.25);
  EXPECT_DOUBLE_EQ(target.layers()[0].weight(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(target.layers()[0].bias(0), 0.5);
  novex::nn::polyak_update(target, online, 1.0);
  EXPECT_TRUE(target == online);
}

TEST(Snapshot, RoundTripIsBitExact) {
  Rng rng(3);
  const DenseNet net = DenseNet::mlp(4, {6, 5}, 3, Activation::kTanh, rng);
  const auto path = std::filesystem::temp_directory_path() / "novex_test_net.nvxw";
  novex::nn::save_net(net, path);
  EXPECT_TRUE(std::filesystem::exists(path.string() + ".manifest"));
  const DenseNet back = novex::nn::load_net(path);
  EXPECT_TRUE(back == net);
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".manifest");
}

TEST(Snapshot, RejectsCorruptFile) {
  const auto path = std::filesystem::temp_directory_path() / "novex_test_bad.nvxw";
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOPE";
  }
  EXPECT_THROW(novex::nn::load_net(path), novex::ConfigError);
  std::filesystem::remove(path);
}

}  // namespace
