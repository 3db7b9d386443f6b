#include "nclab/prediction.hpp"

#include <stdexcept>

namespace nclab {

Vector build_upsilon_bar(const ChannelModel& channel, int horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (channel.means.empty()) throw std::invalid_argument("channel has no means");
  if (channel.scheduled && static_cast<int>(channel.means.size()) != horizon)
    throw std::invalid_argument("channel schedule length ≠ N");
  const Eigen::Index m = channel.means.front().size();
  Vector out(horizon * m);
  for (int k = 0; k < horizon; ++k) {
    const Vector& mu = channel.at(k);
    if (mu.size() != m) throw std::invalid_argument("channel mean length varies over the schedule");
    out.segment(k * m, m) = mu;
  }
  return out;
}

PredictionOperators build_prediction_operators(const PlantModel& plant, const WeightSpec& weights,
                                               const ChannelModel& channel) {
  const int n = plant.n();
  const int m = plant.m();
  const int N = weights.horizon;
  if (plant.b.rows() != n || static_cast<int>(weights.omega_steps.size()) != N ||
      static_cast<int>(weights.psi_steps.size()) != N)
    throw std::invalid_argument("dimension mismatch building prediction operators");

  PredictionOperators ops;
  ops.n = n;
  ops.m = m;
  ops.horizon = N;
  ops.q = weights.q;
  ops.upsilon_bar = build_upsilon_bar(channel, N);
  if (ops.upsilon_bar.size() != N * m) throw std::invalid_argument("dimension mismatch: channel mu vs b");

  // powers[i] = A^i, built by repeated multiplication.
  std::vector<Matrix> powers(N + 1);
  powers[0] = Matrix::Identity(n, n);
  for (int i = 1; i <= N; ++i) powers[i] = plant.a * powers[i - 1];

  ops.phi.resize(N * n, n);
  ops.gamma = Matrix::Zero(N * n, N * m);
  ops.lambda = Matrix::Zero(N * n, N * n);
  for (int i = 0; i < N; ++i) {
    ops.phi.block(i * n, 0, n, n) = powers[i + 1];
    for (int j = 0; j <= i; ++j) {
      ops.gamma.block(i * n, j * m, n, m) = powers[i - j] * plant.b;
      ops.lambda.block(i * n, j * n, n, n) = powers[i - j];
    }
  }

  ops.omega = Matrix::Zero(N * n, N * n);
  ops.psi = Matrix::Zero(N * m, N * m);
  ops.sigma_w_stacked = Matrix::Zero(N * n, N * n);
  for (int k = 0; k < N; ++k) {
    ops.omega.block(k * n, k * n, n, n) = weights.omega_steps[k];
    ops.psi.block(k * m, k * m, m, m) = weights.psi_steps[k];
    ops.sigma_w_stacked.block(k * n, k * n, n, n) = plant.sigma_w;
  }

  const Matrix omega_gamma = ops.omega * ops.gamma;
  ops.omega_p = ops.phi.transpose() * ops.omega * ops.phi;
  ops.omega_g = ops.gamma.transpose() * omega_gamma;
  ops.omega_gp = omega_gamma.transpose() * ops.phi;
  ops.omega_l = ops.lambda.transpose() * ops.omega * ops.lambda;
  // Symmetrize exactly so downstream factorizations see a symmetric matrix.
  ops.omega_p = 0.5 * (ops.omega_p + ops.omega_p.transpose()).eval();
  ops.omega_g = 0.5 * (ops.omega_g + ops.omega_g.transpose()).eval();
  ops.omega_l = 0.5 * (ops.omega_l + ops.omega_l.transpose()).eval();

  ops.omega_d = ops.omega_g.diagonal();
  ops.omega_h = ops.omega_g;
  ops.omega_h.diagonal().setZero();

  ops.noise_trace = (ops.omega_l * ops.sigma_w_stacked).trace();
  return ops;
}

PredictionOperators build_prediction_operators(const Scenario& s) {
  return build_prediction_operators(s.plant, s.weights, s.channel);
}

PredictionOperators with_upsilon(PredictionOperators ops, const Vector& upsilon_bar) {
  if (upsilon_bar.size() != ops.size()) throw std::invalid_argument("upsilon length must be N*m");
  ops.upsilon_bar = upsilon_bar;
  return ops;
}

PredictionOperators with_scalar_upsilon(PredictionOperators ops, double t) {
  ops.upsilon_bar = Vector::Constant(ops.size(), t);
  return ops;
}

PredictionOperators with_channel_means(PredictionOperators ops, const Vector& mu) {
  if (mu.size() != ops.m) throw std::invalid_argument("channel mean length must equal m");
  ops.upsilon_bar = mu.replicate(ops.horizon, 1);
  return ops;
}

}  // namespace nclab
