#include "nclab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <thread>

#include "nclab/rng.hpp"

namespace nclab {

namespace {

// Symmetric square root of a PSD covariance, so singular noise is allowed.
Matrix noise_factor(const Matrix& sigma) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (sigma + sigma.transpose()));
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

Vector sample_noise(const Matrix& factor, std::uint64_t seed, std::uint64_t step) {
  Vector z(factor.cols());
  for (Eigen::Index j = 0; j < z.size(); ++j)
    z(j) = rng::standard_normal(seed, rng::Stream::process_noise, step, static_cast<std::uint64_t>(j));
  return factor * z;
}

// Everything a replicate needs, precomputed once per (scenario, protocol).
struct OpenLoopPlan {
  const Scenario* scn;
  Vector u;  // stacked sequence, Nm
  Matrix noise;
  bool noiseless;
};

OpenLoopPlan make_plan(const Scenario& scn, Protocol p) {
  const auto ops = build_prediction_operators(scn);
  const auto law = synthesize(ops, p);
  OpenLoopPlan plan{&scn, optimal_sequence(law, scn.eval_state), noise_factor(scn.plant.sigma_w), false};
  plan.noiseless = plan.noise.cwiseAbs().maxCoeff() == 0.0;
  return plan;
}

// Rollout kernel; fills `rec` only when non-null.
double run_open_loop(const OpenLoopPlan& plan, std::uint64_t seed, TrajectoryRecord* rec) {
  const Scenario& s = *plan.scn;
  const int n = s.plant.n();
  const int m = s.plant.m();
  const int N = s.weights.horizon;
  Vector x = s.eval_state;
  double total = 0.0;
  if (rec) {
    rec->seed = seed;
    rec->states.assign(1, x);
  }
  Vector applied(m);
  Vector next(n);
  for (int k = 0; k < N; ++k) {
    const Vector v = sample_transmission(s.channel.at(k), seed, static_cast<std::uint64_t>(k));
    const auto uk = plan.u.segment(k * m, m);
    applied = v.cwiseProduct(uk);
    next = s.plant.a * x + s.plant.b * applied;
    if (!plan.noiseless) next += sample_noise(plan.noise, seed, static_cast<std::uint64_t>(k));
    double stage = next.dot(s.weights.omega_steps[k] * next) + applied.dot(s.weights.psi_steps[k] * applied);
    if (k == 0) stage += x.dot(s.weights.q * x);
    total += stage;
    x = next;
    if (rec) {
      rec->inputs.push_back(uk);
      rec->transmissions.push_back(v);
      rec->stage_costs.push_back(stage);
      rec->states.push_back(x);
    }
  }
  if (rec) rec->realized_cost = total;
  return total;
}

// Neumaier-compensated sum in index order.
double compensated_sum(const std::vector<double>& xs) {
  double sum = 0.0;
  double c = 0.0;
  for (double v : xs) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) c += (sum - t) + v;
    else c += (v - t) + sum;
    sum = t;
  }
  return sum + c;
}

MonteCarloStats summarize(const std::vector<double>& costs, std::uint64_t base_seed) {
  MonteCarloStats st;
  st.replicates = static_cast<int>(costs.size());
  st.base_seed = base_seed;
  st.seed_rule = "replicate r uses splitmix64 output r of base_seed";
  st.mean_cost = compensated_sum(costs) / static_cast<double>(costs.size());
  std::vector<double> sq(costs.size());
  for (std::size_t i = 0; i < costs.size(); ++i) sq[i] = (costs[i] - st.mean_cost) * (costs[i] - st.mean_cost);
  const double var = compensated_sum(sq) / static_cast<double>(costs.size() - 1);
  st.std_error = std::sqrt(var / static_cast<double>(costs.size()));
  return st;
}

// Runs fn(r) for r in [0, count) over up to `threads` workers, contiguous chunks.
template <typename Fn>
void parallel_for(int count, int threads, Fn fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int r = 0; r < count; ++r) fn(r);
    return;
  }
  std::vector<std::thread> pool;
  const int chunk = (count + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int lo = t * chunk;
    const int hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (int r = lo; r < hi; ++r) fn(r);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

Vector sample_transmission(const Vector& means, std::uint64_t seed, std::uint64_t step) {
  Vector v(means.size());
  for (Eigen::Index i = 0; i < means.size(); ++i)
    v(i) = rng::uniform01(seed, rng::Stream::transmission, step, static_cast<std::uint64_t>(i)) < means(i) ? 1.0 : 0.0;
  return v;
}

TrajectoryRecord open_loop_rollout(const Scenario& scn, Protocol p, std::uint64_t seed) {
  const auto plan = make_plan(scn, p);
  TrajectoryRecord rec;
  run_open_loop(plan, seed, &rec);
  return rec;
}

TrajectoryRecord receding_horizon_sim(const Scenario& scn, Protocol p, int steps, std::uint64_t seed) {
  if (steps < 1) throw std::invalid_argument("steps must be ≥ 1");
  const int N = scn.weights.horizon;
  const int m = scn.plant.m();
  const auto base = build_prediction_operators(scn);
  const Matrix noise = noise_factor(scn.plant.sigma_w);

  // First-block gain for each rotation of the mean schedule (one for stationary channels).
  const int rotations = scn.channel.scheduled ? N : 1;
  std::vector<Matrix> gains(rotations);
  for (int r = 0; r < rotations; ++r) {
    Vector ups(N * m);
    for (int k = 0; k < N; ++k) ups.segment(k * m, m) = scn.channel.at((k + r) % N);
    gains[r] = synthesize(with_upsilon(base, ups), p).first_gain;
  }

  const Matrix& omega0 = scn.weights.omega_steps.front();
  const Matrix& psi0 = scn.weights.psi_steps.front();
  TrajectoryRecord rec;
  rec.seed = seed;
  Vector x = scn.eval_state;
  rec.states.push_back(x);
  double total = 0.0;
  for (int k = 0; k < steps; ++k) {
    const Vector u = -(gains[k % rotations] * x);
    const Vector v = sample_transmission(scn.channel.at(k % N), seed, static_cast<std::uint64_t>(k));
    const Vector applied = v.cwiseProduct(u);
    Vector next = scn.plant.a * x + scn.plant.b * applied + sample_noise(noise, seed, static_cast<std::uint64_t>(k));
    double stage = next.dot(omega0 * next) + applied.dot(psi0 * applied);
    if (k == 0) stage += x.dot(scn.weights.q * x);
    total += stage;
    x = next;
    rec.inputs.push_back(u);
    rec.transmissions.push_back(v);
    rec.stage_costs.push_back(stage);
    rec.states.push_back(x);
  }
  rec.realized_cost = total;
  return rec;
}

double sequence_expected_cost(const PredictionOperators& ops, const Vector& u, const Vector& x) {
  return protocol_objective(ops, Protocol::udp_like, u, x);
}

MonteCarloStats monte_carlo_cost(const Scenario& scn, Protocol p, int replicates, std::uint64_t base_seed,
                                 int threads) {
  if (replicates < 2) throw std::invalid_argument("replicates must be ≥ 2");
  const auto plan = make_plan(scn, p);
  std::vector<double> costs(static_cast<std::size_t>(replicates));
  parallel_for(replicates, threads, [&](int r) {
    costs[r] = run_open_loop(plan, rng::split_seed(base_seed, static_cast<std::uint64_t>(r)), nullptr);
  });
  return summarize(costs, base_seed);
}

PairedGapStats monte_carlo_gap(const Scenario& scn, int replicates, std::uint64_t base_seed, int threads) {
  if (replicates < 2) throw std::invalid_argument("replicates must be ≥ 2");
  const auto tcp = make_plan(scn, Protocol::tcp_like);
  const auto udp = make_plan(scn, Protocol::udp_like);
  std::vector<double> ct(static_cast<std::size_t>(replicates));
  std::vector<double> cu(ct.size());
  std::vector<double> diff(ct.size());
  parallel_for(replicates, threads, [&](int r) {
    const auto seed = rng::split_seed(base_seed, static_cast<std::uint64_t>(r));
    ct[r] = run_open_loop(tcp, seed, nullptr);
    cu[r] = run_open_loop(udp, seed, nullptr);
    diff[r] = cu[r] - ct[r];
  });
  PairedGapStats out;
  out.tcp = summarize(ct, base_seed);
  out.udp = summarize(cu, base_seed);
  const auto d = summarize(diff, base_seed);
  out.mean_gap = d.mean_cost;
  out.gap_std_error = d.std_error;
  return out;
}

void write_trajectory_csv(const TrajectoryRecord& rec, std::ostream& out) {
  if (rec.states.empty()) throw std::invalid_argument("empty trajectory");
  const auto n = rec.states.front().size();
  const auto m = rec.inputs.empty() ? 0 : rec.inputs.front().size();
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return std::string(buf);
  };
  out << "step";
  for (Eigen::Index i = 1; i <= n; ++i) out << ",x_" << i;
  for (Eigen::Index i = 1; i <= m; ++i) out << ",u_" << i;
  for (Eigen::Index i = 1; i <= m; ++i) out << ",v_" << i;
  out << ",stage_cost\n";
  for (std::size_t k = 0; k < rec.states.size(); ++k) {
    out << k;
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << num(rec.states[k](i));
    const bool has_input = k < rec.inputs.size();
    for (Eigen::Index i = 0; i < m; ++i) out << ',' << (has_input ? num(rec.inputs[k](i)) : "");
    for (Eigen::Index i = 0; i < m; ++i) out << ',' << (has_input ? num(rec.transmissions[k](i)) : "");
    out << ',' << (has_input ? num(rec.stage_costs[k]) : "0") << '\n';
  }
}

}  // namespace nclab
