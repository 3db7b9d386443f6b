#pragma once

#include <complex>
#include <string>
#include <vector>

#include "nclab/prediction.hpp"

namespace nclab {

enum class Protocol { tcp_like, udp_like };

std::string to_string(Protocol p);
/// Accepts "tcp", "udp", "tcp_like", "udp_like" (case-sensitive).
Protocol parse_protocol(const std::string& text);

struct ControlLaw {
  Protocol protocol = Protocol::tcp_like;
  Matrix gram;        // Nm x Nm, as written (not symmetric)
  Matrix gain;        // Nm x n, U* = -gain x
  Matrix first_gain;  // m x n
};

struct CostReport {
  double total = 0.0;
  double constant_term = 0.0;
  double reduction_term = 0.0;
};

/// Diagonal penalty the law adds beside the mean-weighted Omega_g:
/// psi for TCP, psi + omega_d (1 - upsilon) for UDP.
Vector effective_penalty(const PredictionOperators& ops, Protocol p);

/// G for the protocol: Omega_g Y + Psi (TCP) or Psi + Omega_d (I - Y) + Omega_g Y (UDP).
Matrix gram_matrix(const PredictionOperators& ops, Protocol p);

/// Y G, the symmetric positive definite form that is actually factorized.
Matrix symmetric_gram(const PredictionOperators& ops, Protocol p);

ControlLaw synthesize(const PredictionOperators& ops, Protocol p);

/// x'(Q + Omega_p)x + tr(Sigma_W Omega_l); shared by both protocols.
double constant_term(const PredictionOperators& ops, const Vector& x);
/// q' (Y G)^{-1} q with q = Y Omega_gp x.
double reduction_term(const PredictionOperators& ops, Protocol p, const Vector& x);

CostReport expected_cost(const PredictionOperators& ops, Protocol p, const Vector& x);

/// Value of the protocol's minimized objective at an arbitrary input sequence U.
/// For UDP this is the exact expected cost of applying U open loop.
double protocol_objective(const PredictionOperators& ops, Protocol p, const Vector& u, const Vector& x);

/// Expected quadratic error term: tr(Omega_l Sigma_W) for TCP, plus
/// U' Y Omega_d (I - Y) U for UDP.
double error_quadratic_expectation(const PredictionOperators& ops, Protocol p, const Vector& u);

/// E[U' Y Omega_g Y U] for independent Bernoulli diagonal Y with means upsilon_bar.
double bernoulli_quadratic_expectation(const Matrix& omega_g, const Vector& upsilon_bar, const Vector& u);

Vector optimal_sequence(const ControlLaw& law, const Vector& x);

/// Eigenvalues of A - B K_first, by descending real part then descending imaginary part.
std::vector<std::complex<double>> closed_loop_eigenvalues(const ControlLaw& law, const PlantModel& plant);

}  // namespace nclab
