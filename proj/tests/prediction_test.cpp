#include "nclab/prediction.hpp"

#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace nclab {
namespace {

Scenario unit_scalar(int horizon) {
  Scenario s;
  s.plant.a = Matrix::Ones(1, 1);
  s.plant.b = Matrix::Ones(1, 1);
  s.plant.sigma_w = Matrix::Zero(1, 1);
  s.plant.x0_mean = Vector::Ones(1);
  s.plant.x0_cov = Matrix::Ones(1, 1);
  s.weights.horizon = horizon;
  s.weights.q = Matrix::Ones(1, 1);
  s.weights.omega_steps.assign(horizon, Matrix::Ones(1, 1));
  s.weights.psi_steps.assign(horizon, Matrix::Ones(1, 1));
  s.channel.means = {Vector::Constant(1, 0.5)};
  s.eval_state = Vector::Ones(1);
  return s;
}

GTEST_TEST(PredictionTest, ScalarUnitPlant) {
  const auto ops = build_prediction_operators(unit_scalar(2));
  Matrix lower(2, 2);
  lower << 1, 0, 1, 1;
  EXPECT_EQ(ops.phi, Matrix::Ones(2, 1));
  EXPECT_EQ(ops.gamma, lower);
  EXPECT_EQ(ops.lambda, lower);
}

GTEST_TEST(PredictionTest, SingleStepCollapse) {
  std::mt19937_64 gen(3);
  oracle::RandomSpec spec;
  spec.max_horizon = 1;
  for (int t = 0; t < 10; ++t) {
    const auto s = oracle::random_scenario(gen, spec);
    const auto ops = build_prediction_operators(s);
    const Matrix& a = s.plant.a;
    const Matrix& b = s.plant.b;
    const Matrix& w = s.weights.omega_steps[0];
    EXPECT_EQ(ops.phi, a);
    EXPECT_EQ(ops.gamma, b);
    EXPECT_EQ(ops.lambda, Matrix::Identity(s.plant.n(), s.plant.n()));
    EXPECT_TRUE(ops.omega_p.isApprox(a.transpose() * w * a, 1e-13));
    EXPECT_TRUE(ops.omega_g.isApprox(b.transpose() * w * b, 1e-13));
    EXPECT_TRUE(ops.omega_gp.isApprox(b.transpose() * w * a, 1e-13));
  }
}

GTEST_TEST(PredictionTest, PendulumDimensions) {
  const auto ops = build_prediction_operators(load_scenario(oracle::data_path("pendulum.json")));
  EXPECT_EQ(ops.phi.rows(), 320);
  EXPECT_EQ(ops.phi.cols(), 4);
  EXPECT_EQ(ops.gamma.rows(), 320);
  EXPECT_EQ(ops.gamma.cols(), 80);
  EXPECT_EQ(ops.upsilon_matrix().rows(), 80);
  EXPECT_EQ(ops.upsilon_matrix().cols(), 80);
}

GTEST_TEST(PredictionTest, UpsilonBarExamples) {
  ChannelModel c;
  c.means = {Vector::Constant(1, 0.5)};
  EXPECT_EQ(build_upsilon_bar(c, 3), Vector::Constant(3, 0.5));
  c.means = {Vector::Ones(2)};
  EXPECT_EQ(Matrix(build_upsilon_bar(c, 2).asDiagonal()), Matrix::Identity(4, 4));
  c.scheduled = true;
  c.means = {Vector::Constant(1, 0.9), Vector::Constant(1, 0.5)};
  Vector expect(2);
  expect << 0.9, 0.5;
  EXPECT_EQ(build_upsilon_bar(c, 2), expect);
  EXPECT_THROW(build_upsilon_bar(c, 3), std::invalid_argument);
}

GTEST_TEST(PredictionTest, BlockStructure) {
  std::mt19937_64 gen(5);
  for (int t = 0; t < 20; ++t) {
    const auto s = oracle::random_scenario(gen);
    const auto ops = build_prediction_operators(s);
    const int n = ops.n, m = ops.m, N = ops.horizon;
    Matrix power = Matrix::Identity(n, n);
    std::vector<Matrix> powers{power};
    for (int i = 0; i < N; ++i) powers.push_back(powers.back() * s.plant.a);
    for (int i = 0; i < N; ++i) {
      EXPECT_TRUE(ops.phi.block(i * n, 0, n, n).isApprox(powers[i + 1], 1e-12));
      for (int j = 0; j < N; ++j) {
        if (j <= i) {
          EXPECT_TRUE(ops.gamma.block(i * n, j * m, n, m).isApprox(powers[i - j] * s.plant.b, 1e-12));
          EXPECT_TRUE(ops.lambda.block(i * n, j * n, n, n).isApprox(powers[i - j], 1e-12));
        } else {
          EXPECT_TRUE(ops.gamma.block(i * n, j * m, n, m).isZero(0.0));
          EXPECT_TRUE(ops.lambda.block(i * n, j * n, n, n).isZero(0.0));
        }
      }
    }
    // Derived products.
    EXPECT_TRUE(ops.omega_h.diagonal().isZero(0.0));
    EXPECT_EQ(Matrix(ops.omega_h + Matrix(ops.omega_d.asDiagonal())), ops.omega_g);
    EXPECT_TRUE((ops.omega_d.array() > 0).all());
    // Omega_g is PSD; it is PD when Gamma has full column rank (here m <= n).
    Eigen::SelfAdjointEigenSolver<Matrix> eg(ops.omega_g);
    EXPECT_GE(eg.eigenvalues().minCoeff(), -1e-12 * eg.eigenvalues().maxCoeff());
    if (ops.m <= ops.n) EXPECT_GT(eg.eigenvalues().minCoeff(), 0.0);
    EXPECT_EQ(Eigen::LLT<Matrix>(ops.omega_l).info(), Eigen::Success);
    EXPECT_TRUE(ops.omega_l.isApprox(ops.lambda.transpose() * ops.omega * ops.lambda, 1e-12));
    EXPECT_GT(ops.noise_trace, 0.0);
  }
}

GTEST_TEST(PredictionTest, BuildIsBitReproducible) {
  const auto s = load_scenario(oracle::data_path("pendulum.json"));
  const auto a = build_prediction_operators(s);
  const auto b = build_prediction_operators(s);
  EXPECT_EQ(a.gamma, b.gamma);
  EXPECT_EQ(a.omega_g, b.omega_g);
  EXPECT_EQ(a.omega_l, b.omega_l);
}

// Stacked prediction equation vs stepping the plant with sampled packets and noise.
GTEST_TEST(PredictionTest, MatrixPlantMatchesIteration) {
  std::mt19937_64 gen(17);
  oracle::RandomSpec spec;
  spec.max_n = 3;
  spec.max_m = 3;
  spec.max_horizon = 5;
  std::normal_distribution<double> nd(0.0, 1.0);
  std::bernoulli_distribution coin(0.6);
  for (int t = 0; t < 50; ++t) {
    const auto s = oracle::random_scenario(gen, spec);
    const auto ops = build_prediction_operators(s);
    const int d = ops.size();
    Vector u(d), v(d), w(ops.horizon * ops.n);
    for (int i = 0; i < d; ++i) {
      u(i) = nd(gen);
      v(i) = coin(gen) ? 1.0 : 0.0;
    }
    for (int i = 0; i < w.size(); ++i) w(i) = nd(gen);
    const Vector x0 = s.eval_state;
    const Vector stacked = ops.phi * x0 + ops.gamma * v.cwiseProduct(u) + ops.lambda * w;
    const Vector stepped = oracle::iterate_plant(s, x0, v.cwiseProduct(u), w);
    for (int i = 0; i < stacked.size(); ++i)
      EXPECT_LE(std::abs(stacked(i) - stepped(i)), 1e-12 * std::max(1.0, std::abs(stepped(i))));
  }
}

// tr(Omega_l Sigma_W) equals the noise cost from covariance propagation.
GTEST_TEST(PredictionTest, NoiseTraceMatchesCovariancePropagation) {
  std::mt19937_64 gen(23);
  for (int t = 0; t < 20; ++t) {
    const auto s = oracle::random_scenario(gen);
    const auto ops = build_prediction_operators(s);
    EXPECT_LT(oracle::rel_err(ops.noise_trace, oracle::noise_cost(s)), 1e-11);
  }
}

}  // namespace
}  // namespace nclab
