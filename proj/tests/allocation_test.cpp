#include "nclab/allocation.hpp"

#include <sstream>

#include <gtest/gtest.h>

#include "nclab/analysis.hpp"
#include "oracles.hpp"

namespace nclab {
namespace {

struct Fixture {
  PredictionOperators ops;
  Vector x;
};

Fixture load(const char* name) {
  const auto s = load_scenario(oracle::data_path(name));
  return {build_prediction_operators(s), s.eval_state};
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

GTEST_TEST(AllocationTest, CommunicationCost) {
  EXPECT_NEAR(communication_cost(vec2(0.9, 0.5), vec2(1, 1)), 1.4, 1e-15);
  EXPECT_EQ(communication_cost(vec2(0.9, 0.5), vec2(0, 0)), 0.0);
  EXPECT_NEAR(communication_cost(vec2(0.9, 0.5), vec2(0.05, 1)), 0.545, 1e-15);
  EXPECT_THROW(communication_cost(vec2(0.9, 0.5), vec2(-1, 1)), std::invalid_argument);
}

GTEST_TEST(AllocationTest, Feasibility) {
  const auto f = load("mixed.json");
  EXPECT_TRUE(is_feasible(f.ops, vec2(0.01, 0.01), Protocol::udp_like, 1e18, f.x));
  const double best = control_cost(f.ops, Vector::Ones(2), Protocol::udp_like, f.x);
  for (double a : {0.1, 0.5, 1.0})
    EXPECT_FALSE(is_feasible(f.ops, vec2(a, a), Protocol::udp_like, best - 1e-9, f.x));
  // Monotone: feasible at mu implies feasible at any larger mu.
  const double alpha = control_cost(f.ops, vec2(0.6, 0.4), Protocol::udp_like, f.x);
  for (int i = 1; i <= 10; ++i)
    for (int j = 1; j <= 10; ++j) {
      const Vector mu = vec2(i / 10.0, j / 10.0);
      if (is_feasible(f.ops, mu, Protocol::udp_like, alpha, f.x)) {
        EXPECT_TRUE(is_feasible(f.ops, vec2(std::min(1.0, mu(0) + 0.1), mu(1)), Protocol::udp_like, alpha, f.x));
        EXPECT_TRUE(is_feasible(f.ops, vec2(mu(0), std::min(1.0, mu(1) + 0.1)), Protocol::udp_like, alpha, f.x));
      }
    }
}

GTEST_TEST(AllocationTest, InfeasibleBudget) {
  const auto f = load("mixed.json");
  const double best = control_cost(f.ops, Vector::Ones(2), Protocol::tcp_like, f.x);
  try {
    optimize_allocation(f.ops, Protocol::tcp_like, best * (1 - 1e-9), vec2(1, 1), f.x);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "budget infeasible");
  }
}

// Exhaustive scan of the same grid as an oracle for the grid minimizer.
GTEST_TEST(AllocationTest, GridMinimizerMatchesExhaustiveScan) {
  const auto f = load("mixed.json");
  const double c1 = control_cost(f.ops, Vector::Ones(2), Protocol::udp_like, f.x);
  for (const Vector& beta : {vec2(1, 1), vec2(0.05, 1), vec2(1, 0.05)}) {
    for (double scale : {1.001, 1.05, 1.3}) {
      const double alpha = c1 * scale;
      const auto rep = optimize_allocation(f.ops, Protocol::udp_like, alpha, beta, f.x, 0.05);
      double best = 1e300;
      Vector best_mu;
      for (int i = 1; i <= 20; ++i)
        for (int j = 1; j <= 20; ++j) {
          const Vector mu = vec2(i * 0.05, j * 0.05);
          if (!is_feasible(f.ops, mu, Protocol::udp_like, alpha, f.x)) continue;
          const double c = communication_cost(mu, beta);
          if (c < best - 1e-12) {
            best = c;
            best_mu = mu;
          }
        }
      EXPECT_TRUE(rep.grid_m_star.isApprox(best_mu, 1e-12)) << rep.grid_m_star.transpose() << " vs " << best_mu.transpose();
      EXPECT_LE(rep.comm_cost, best + 1e-12);
      EXPECT_LE(rep.control_cost, alpha);
      for (const auto& s : rep.frontier)
        if (s.feasible) EXPECT_LE(rep.comm_cost, s.comm_cost + 1e-12);
    }
  }
}

GTEST_TEST(AllocationTest, SymmetricPricesGiveContourSolution) {
  const auto f = load("mixed.json");
  const double alpha = control_cost(f.ops, vec2(0.8, 0.8), Protocol::udp_like, f.x);
  const auto rep = optimize_allocation(f.ops, Protocol::udp_like, alpha, vec2(1, 1), f.x);
  EXPECT_LE(rep.control_cost, alpha);
  // On the iso-cost contour: lowering any channel by the refinement step breaks feasibility.
  for (int i = 0; i < 2; ++i) {
    if (rep.m_star(i) <= 2e-6) continue;
    Vector lower = rep.m_star;
    lower(i) -= 2e-6;
    EXPECT_FALSE(is_feasible(f.ops, lower, Protocol::udp_like, alpha, f.x));
  }
}

GTEST_TEST(AllocationTest, SingleChannelHitsBudgetWithEquality) {
  const auto f = load("pendulum.json");
  const double alpha = control_cost(f.ops, Vector::Constant(1, 0.7345), Protocol::tcp_like, f.x);
  const auto rep = optimize_allocation(f.ops, Protocol::tcp_like, alpha, Vector::Ones(1), f.x);
  EXPECT_NEAR(rep.m_star(0), 0.7345, 1e-6);
  EXPECT_LE(rep.control_cost, alpha);
}

GTEST_TEST(AllocationTest, AgreesWithIsoCostBisection) {
  const auto f = load("pendulum.json");
  const double alpha = expected_cost(with_scalar_upsilon(f.ops, 0.9), Protocol::udp_like, f.x).total;
  const auto rep = optimize_allocation(f.ops, Protocol::tcp_like, alpha, Vector::Ones(1), f.x);
  EXPECT_NEAR(rep.m_star(0), iso_cost_transmission(f.ops, 0.9, f.x), 1e-6);
}

GTEST_TEST(AllocationTest, RefinementNeverWorsens) {
  const auto f = load("mixed.json");
  const double alpha = control_cost(f.ops, vec2(0.55, 0.95), Protocol::tcp_like, f.x);
  const auto rep = optimize_allocation(f.ops, Protocol::tcp_like, alpha, vec2(0.3, 1.0), f.x);
  EXPECT_LE(rep.comm_cost, communication_cost(rep.grid_m_star, vec2(0.3, 1.0)));
  EXPECT_LE(rep.control_cost, alpha * (1 + 1e-9));
}

GTEST_TEST(AllocationTest, ResolutionValidated) {
  const auto f = load("mixed.json");
  EXPECT_THROW(optimize_allocation(f.ops, Protocol::udp_like, 1e9, vec2(1, 1), f.x, 0.0), std::invalid_argument);
  EXPECT_THROW(optimize_allocation(f.ops, Protocol::udp_like, 1e9, vec2(1, 1), f.x, 0.7), std::invalid_argument);
}

GTEST_TEST(AllocationTest, FrontierCsv) {
  const auto f = load("mixed.json");
  const auto rep = optimize_allocation(f.ops, Protocol::udp_like, 1e9, vec2(1, 1), f.x, 0.1);
  std::ostringstream out;
  write_frontier_csv(rep, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "mu_1,mu_2,control_cost,comm_cost,feasible");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 10);
}

}  // namespace
}  // namespace nclab
