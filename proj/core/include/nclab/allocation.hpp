#pragma once

#include <ostream>
#include <vector>

#include "nclab/controller.hpp"

namespace nclab {

struct FrontierSample {
  Vector mu;
  double control_cost = 0.0;
  double comm_cost = 0.0;
  bool feasible = false;
};

struct AllocationReport {
  Vector m_star;
  double comm_cost = 0.0;
  double control_cost = 0.0;
  double alpha = 0.0;
  Protocol protocol = Protocol::udp_like;
  double grid_resolution = 0.0;
  Vector grid_m_star;  // grid minimizer before refinement
  std::vector<FrontierSample> frontier;
};

/// sum_i beta_i mu_i
double communication_cost(const Vector& mu, const Vector& beta);

double control_cost(const PredictionOperators& ops, const Vector& mu, Protocol p, const Vector& x);

bool is_feasible(const PredictionOperators& ops, const Vector& mu, Protocol p, double alpha, const Vector& x);

/// Channel means in (0,1]^m minimizing communication cost subject to expected
/// cost <= alpha. Grid {res, 2 res, ..., 1} per channel, ties to the
/// lexicographically smallest mean vector, then per-channel bisection to 1e-6.
AllocationReport optimize_allocation(const PredictionOperators& ops, Protocol p, double alpha, const Vector& beta,
                                     const Vector& x, double resolution = 0.01);

/// Header `mu_1..mu_m,control_cost,comm_cost,feasible`.
void write_frontier_csv(const AllocationReport& report, std::ostream& out);

}  // namespace nclab
