#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nclab/controller.hpp"

namespace nclab {

struct GapReport {
  double j_tcp = 0.0;
  double j_udp = 0.0;
  double gap = 0.0;  // j_udp - j_tcp
};

/// The quadratic pencil P(u) = T u^2 + 2 H u - H whose singular points are the
/// critical-point candidates of the shared-channel gap. H is diagonal.
struct RootPencil {
  Matrix t;
  Vector h;
};

struct RootCandidate {
  double lambda = 0.0;      // eigenvalue of T H^{-1} that generated this candidate
  double value = 0.0;       // NaN when complex
  bool real = false;
  bool in_unit_interval = false;
  bool eigen_condition = false;  // |max Rayleigh quotient of f(value)| <= tol * ||f(0.5)||
  double residual = 0.0;         // determinant_residual at value (NaN when complex)

  bool valid() const { return real && in_unit_interval; }
};

enum class MaxMethod { analytic_roots, grid_fallback };
std::string to_string(MaxMethod m);

struct MaxDiffReport {
  std::vector<double> lambdas;
  std::vector<RootCandidate> candidates;
  double maximizer = 0.0;
  double gap_at_max = 0.0;
  MaxMethod method = MaxMethod::grid_fallback;
  std::optional<double> analytic_maximizer;
  double grid_maximizer = 0.0;
  double grid_gap = 0.0;
};

GapReport cost_gap(const PredictionOperators& ops, const Vector& x);

/// Gap at the shared channel mean u, via u(1-u) a' G_G(u) Omega_d G_F(u) a with a = Omega_gp x.
double scalar_cost_gap(const PredictionOperators& ops, double upsilon, const Vector& x);

/// The matrix f(u) whose quadratic form in Omega_gp x is the gap derivative.
Matrix derivative_kernel(const PredictionOperators& ops, double upsilon);

/// d/du of scalar_cost_gap at the shared channel mean u.
double gap_derivative(const PredictionOperators& ops, double upsilon, const Vector& x);

RootPencil root_pencil(const PredictionOperators& ops);

/// Normalized backward error of the pencil at u:
/// sigma_min(P(u)) / (||T|| u^2 + 2 ||H|| |u| + ||H||). Zero exactly at a root.
double determinant_residual(const RootPencil& pencil, double upsilon);
double determinant_residual(const PredictionOperators& ops, double upsilon);

/// All 2Nm candidates 1/(1 +- sqrt(1 + lambda_i)), with validity flags.
std::vector<RootCandidate> determinant_root_candidates(const PredictionOperators& ops, double eigen_tol = 1e-8);

/// Shared-channel mean maximizing the gap. Analytic roots are used when one
/// passes the eigenvalue condition; the refined grid search always runs and
/// is used otherwise.
MaxDiffReport maximal_gap(const PredictionOperators& ops, const Vector& x, double eigen_tol = 1e-8);

/// Costs along a grid of channel means (each entry length m or Nm), which must be
/// strictly increasing entrywise.
std::vector<double> monotonic_sweep(const PredictionOperators& ops, const std::vector<Vector>& grid, Protocol p,
                                    const Vector& x);

/// Shared TCP mean t with J_TCP(t) = J_UDP(udp_mean), found by bisection on (0, udp_mean].
double iso_cost_transmission(const PredictionOperators& ops, double udp_mean, const Vector& x);

/// Scale s in (0, 1] with J_TCP(s * udp_means) = J_UDP(udp_means); returns s * udp_means.
Vector iso_cost_direction(const PredictionOperators& ops, const Vector& udp_means, const Vector& x);

}  // namespace nclab
