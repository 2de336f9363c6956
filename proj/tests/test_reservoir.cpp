#include <gtest/gtest.h>

#include <cmath>

#include "novex/errors.hpp"
#include "novex/random.hpp"
#include "novex/reservoir.hpp"

namespace {

/// Gelfand's formula by repeated squaring: rho = lim ||A^n||^(1/n), n = 2^m, with the
/// running matrix renormalized each round so nothing overflows.
double gelfand_radius(const Eigen::MatrixXd& a, int rounds) {
  Eigen::MatrixXd b = a;
  double log_norm = std::log(b.norm());
  b /= b.norm();
  for (int i = 0; i < rounds; ++i) {
    Eigen::MatrixXd sq = b * b;
    const double n = sq.norm();
    log_norm = 2.0 * log_norm + std::log(n);
    b = sq / n;
  }
  return std::exp(log_norm / std::pow(2.0, rounds));
}

TEST(Reservoir, SpectralRadiusMatchesIndependentEstimate) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = novex::esn_init(3, 180, 1.15, 0.1, seed);
    const Eigen::MatrixXd w(p.recurrent);
    EXPECT_NEAR(gelfand_radius(w, 40), 1.15, 1e-6) << "seed " << seed;
    EXPECT_NEAR(novex::spectral_radius(w), 1.15, 1e-9) << "seed " << seed;
  }
}

TEST(Reservoir, ShapeSparsityAndInputRange) {
  const auto p = novex::esn_init(5, 100, 1.15, 0.1, 9);
  EXPECT_EQ(p.size(), 100);
  EXPECT_EQ(p.input_dim(), 5);
  EXPECT_EQ(p.recurrent.nonZeros(), 1000);
  EXPECT_LE(p.input_weights.cwiseAbs().maxCoeff(), 1.0);
}

TEST(Reservoir, SameSeedSameWeights) {
  const auto a = novex::esn_init(2, 60, 1.15, 0.1, 42);
  const auto b = novex::esn_init(2, 60, 1.15, 0.1, 42);
  const auto c = novex::esn_init(2, 60, 1.15, 0.1, 43);
  EXPECT_EQ(a.input_weights, b.input_weights);
  EXPECT_EQ(Eigen::MatrixXd(a.recurrent), Eigen::MatrixXd(b.recurrent));
  EXPECT_NE(a.input_weights, c.input_weights);
}

TEST(Reservoir, ReplayIsBitExactWithOnlineStepping) {
  const auto p = novex::esn_init(3, 80, 1.15, 0.1, 5);
  std::vector<Eigen::VectorXd> inputs;
  Eigen::MatrixXd columns(3, 50);
  novex::Rng rng(11);
  for (int t = 0; t < 50; ++t) {
    Eigen::VectorXd u(3);
    for (int i = 0; i < 3; ++i) u(i) = novex::uniform(rng, -2.0, 2.0);
    inputs.push_back(u);
    columns.col(t) = u;
  }
  auto online = novex::EsnState::zeros(80);
  std::vector<novex::EsnState> stepped;
  for (const auto& u : inputs) {
    online = novex::esn_step(p, online, u);
    stepped.push_back(online);
  }
  const auto replayed = novex::esn_replay(p, novex::EsnState::zeros(80), inputs);
  const auto matrix = novex::esn_replay_matrix(p, Eigen::VectorXd::Zero(80), columns);
  ASSERT_EQ(replayed.size(), stepped.size());
  for (std::size_t t = 0; t < stepped.size(); ++t) {
    EXPECT_EQ(replayed[t].hidden, stepped[t].hidden);
    EXPECT_EQ(replayed[t].steps, t + 1);
    EXPECT_EQ(Eigen::VectorXd(matrix.col(static_cast<Eigen::Index>(t))), stepped[t].hidden);
  }
}

TEST(Reservoir, StatesStayInsideTanhRange) {
  const auto p = novex::esn_init(2, 50, 1.15, 0.1, 1);
  auto s = novex::EsnState::zeros(50);
  for (int t = 0; t < 200; ++t) {
    s = novex::esn_step(p, s, Eigen::Vector2d(10.0, -10.0));
    ASSERT_LE(s.hidden.cwiseAbs().maxCoeff(), 1.0);
  }
}

TEST(Reservoir, DrivenStatesForgetTheirStart) {
  const auto p = novex::esn_init(2, 120, 1.15, 0.1, 3);
  novex::Rng rng(4);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(120);
  Eigen::VectorXd b = Eigen::VectorXd::Constant(120, 0.5);
  const double start = (a - b).norm();
  for (int t = 0; t < 300; ++t) {
    const Eigen::Vector2d u(novex::uniform(rng, -3.0, 3.0), novex::uniform(rng, -3.0, 3.0));
    a = novex::esn_step(p, {a, 0}, u).hidden;
    b = novex::esn_step(p, {b, 0}, u).hidden;
  }
  EXPECT_LT((a - b).norm(), 1e-3 * start);
}

TEST(Reservoir, RejectsBadArguments) {
  EXPECT_THROW(novex::esn_init(2, 0, 1.15, 0.1, 0), novex::ConfigError);
  EXPECT_THROW(novex::esn_init(2, 10, 1.15, 0.0, 0), novex::ConfigError);
  EXPECT_THROW(novex::esn_init(2, 10, -1.0, 0.1, 0), novex::ConfigError);
  const auto p = novex::esn_init(2, 10, 1.15, 0.5, 0);
  EXPECT_THROW(novex::esn_step(p, novex::EsnState::zeros(10), Eigen::Vector3d::Zero()),
               novex::ConfigError);
}

}  // namespace
