#include "nclab/controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nclab {

std::string to_string(Protocol p) { return p == Protocol::tcp_like ? "tcp" : "udp"; }

Protocol parse_protocol(const std::string& text) {
  if (text == "tcp" || text == "tcp_like") return Protocol::tcp_like;
  if (text == "udp" || text == "udp_like") return Protocol::udp_like;
  throw std::invalid_argument("unknown protocol '" + text + "' (expected tcp or udp)");
}

Vector effective_penalty(const PredictionOperators& ops, Protocol p) {
  Vector pen = ops.psi_diag();
  if (p == Protocol::udp_like)
    pen += ops.omega_d.cwiseProduct(Vector::Ones(ops.size()) - ops.upsilon_bar);
  return pen;
}

Matrix gram_matrix(const PredictionOperators& ops, Protocol p) {
  Matrix g = ops.omega_g * ops.upsilon_bar.asDiagonal();
  g.diagonal() += effective_penalty(ops, p);
  return g;
}

Matrix symmetric_gram(const PredictionOperators& ops, Protocol p) {
  const auto& u = ops.upsilon_bar;
  Matrix s = u.asDiagonal() * ops.omega_g * u.asDiagonal();
  s.diagonal() += u.cwiseProduct(effective_penalty(ops, p));
  return s;
}

namespace {

Eigen::LLT<Matrix> factor(const PredictionOperators& ops, Protocol p) {
  if ((ops.upsilon_bar.array() <= 0.0).any())
    throw std::invalid_argument("channel means must be positive");
  Eigen::LLT<Matrix> llt(symmetric_gram(ops, p));
  if (llt.info() != Eigen::Success) throw std::runtime_error("singular Gram matrix");
  return llt;
}

}  // namespace

ControlLaw synthesize(const PredictionOperators& ops, Protocol p) {
  const auto llt = factor(ops, p);
  ControlLaw law;
  law.protocol = p;
  law.gram = gram_matrix(ops, p);
  law.gain = llt.solve(ops.upsilon_bar.asDiagonal() * ops.omega_gp);
  law.first_gain = law.gain.topRows(ops.m);
  return law;
}

double constant_term(const PredictionOperators& ops, const Vector& x) {
  return x.dot((ops.q + ops.omega_p) * x) + ops.noise_trace;
}

double reduction_term(const PredictionOperators& ops, Protocol p, const Vector& x) {
  const Vector q = ops.upsilon_bar.cwiseProduct(ops.omega_gp * x);
  return q.dot(factor(ops, p).solve(q));
}

CostReport expected_cost(const PredictionOperators& ops, Protocol p, const Vector& x) {
  CostReport r;
  r.constant_term = constant_term(ops, x);
  r.reduction_term = reduction_term(ops, p, x);
  r.total = r.constant_term - r.reduction_term;
  return r;
}

double protocol_objective(const PredictionOperators& ops, Protocol p, const Vector& u, const Vector& x) {
  const Vector yu = ops.upsilon_bar.cwiseProduct(u);
  return constant_term(ops, x) + 2.0 * yu.dot(ops.omega_gp * x) + yu.dot(ops.omega_g * yu) +
         yu.dot(effective_penalty(ops, p).cwiseProduct(u));
}

double error_quadratic_expectation(const PredictionOperators& ops, Protocol p, const Vector& u) {
  if (p == Protocol::tcp_like) return ops.noise_trace;
  const Vector var = ops.upsilon_bar.cwiseProduct(Vector::Ones(ops.size()) - ops.upsilon_bar);
  return u.cwiseAbs2().dot(var.cwiseProduct(ops.omega_d)) + ops.noise_trace;
}

double bernoulli_quadratic_expectation(const Matrix& omega_g, const Vector& upsilon_bar, const Vector& u) {
  const Vector yu = upsilon_bar.cwiseProduct(u);
  const Vector var = upsilon_bar.cwiseProduct(Vector::Ones(u.size()) - upsilon_bar);
  return yu.dot(omega_g * yu) + u.cwiseAbs2().dot(var.cwiseProduct(omega_g.diagonal()));
}

Vector optimal_sequence(const ControlLaw& law, const Vector& x) { return -(law.gain * x); }

std::vector<std::complex<double>> closed_loop_eigenvalues(const ControlLaw& law, const PlantModel& plant) {
  const Matrix closed = plant.a - plant.b * law.first_gain;
  Eigen::EigenSolver<Matrix> es(closed, false);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigenvalue solver did not converge");
  std::vector<std::complex<double>> ev(es.eigenvalues().data(),
                                       es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(ev.begin(), ev.end(), [](const auto& a, const auto& b) {
    const double tol = 1e-12 * std::max({1.0, std::abs(a.real()), std::abs(b.real())});
    if (std::abs(a.real() - b.real()) > tol) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  return ev;
}

}  // namespace nclab
