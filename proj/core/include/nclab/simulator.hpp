#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "nclab/controller.hpp"

namespace nclab {

struct TrajectoryRecord {
  std::vector<Vector> states;         // steps + 1 entries
  std::vector<Vector> inputs;         // commanded inputs, steps entries
  std::vector<Vector> transmissions;  // 0/1 per channel, steps entries
  std::vector<double> stage_costs;    // steps entries, summing to realized_cost
  double realized_cost = 0.0;
  std::uint64_t seed = 0;
};

struct MonteCarloStats {
  double mean_cost = 0.0;
  double std_error = 0.0;
  int replicates = 0;
  std::uint64_t base_seed = 0;
  std::string seed_rule;
};

struct PairedGapStats {
  MonteCarloStats tcp;
  MonteCarloStats udp;
  double mean_gap = 0.0;  // mean of udp - tcp over paired replicates
  double gap_std_error = 0.0;
};

/// Packet arrivals for one step: component i is 1 with probability means(i).
Vector sample_transmission(const Vector& means, std::uint64_t seed, std::uint64_t step);

/// Computes U* once at the evaluation state and applies its N blocks open loop.
TrajectoryRecord open_loop_rollout(const Scenario& scn, Protocol p, std::uint64_t seed);

/// Re-solves the law at every measured state and applies the first block only.
TrajectoryRecord receding_horizon_sim(const Scenario& scn, Protocol p, int steps, std::uint64_t seed);

/// Exact expectation of the realized open-loop cost of a fixed sequence U.
double sequence_expected_cost(const PredictionOperators& ops, const Vector& u, const Vector& x);

/// Replicate r uses seed split_seed(base_seed, r); results do not depend on `threads`.
MonteCarloStats monte_carlo_cost(const Scenario& scn, Protocol p, int replicates, std::uint64_t base_seed,
                                 int threads = 1);

/// Both protocols on the same replicate seeds (common random numbers).
PairedGapStats monte_carlo_gap(const Scenario& scn, int replicates, std::uint64_t base_seed, int threads = 1);

/// Header `step,x_1..x_n,u_1..u_m,v_1..v_m,stage_cost`; the last row holds the
/// terminal state with empty input and transmission fields.
void write_trajectory_csv(const TrajectoryRecord& rec, std::ostream& out);

}  // namespace nclab
