#pragma once

#include "nclab/scenario.hpp"

namespace nclab {

/// Horizon-stacked prediction model X = Phi x + Gamma Y U + Lambda W and the
/// weight products that every cost and law formula is built from.
struct PredictionOperators {
  int n = 0;
  int m = 0;
  int horizon = 0;

  Matrix phi;     // Nn x n
  Matrix gamma;   // Nn x Nm
  Matrix lambda;  // Nn x Nn
  Vector upsilon_bar;  // diagonal of the Nm x Nm mean matrix
  Matrix sigma_w_stacked;  // Nn x Nn
  Matrix omega;   // Nn x Nn
  Matrix psi;     // Nm x Nm, diagonal
  Matrix q;       // n x n

  Matrix omega_p;   // Phi' Omega Phi
  Matrix omega_g;   // Gamma' Omega Gamma
  Matrix omega_gp;  // Gamma' Omega Phi
  Matrix omega_l;   // Lambda' Omega Lambda
  Vector omega_d;   // diagonal of Omega_g
  Matrix omega_h;   // Omega_g with the diagonal zeroed

  double noise_trace = 0.0;  // tr(Omega_l Sigma_W stacked)

  int size() const { return horizon * m; }
  Vector psi_diag() const { return psi.diagonal(); }
  Matrix upsilon_matrix() const { return upsilon_bar.asDiagonal(); }
  Matrix omega_d_matrix() const { return omega_d.asDiagonal(); }
};

/// Diagonal of the stacked channel-mean matrix: I_N (x) M, or M_0..M_{N-1}.
Vector build_upsilon_bar(const ChannelModel& channel, int horizon);

PredictionOperators build_prediction_operators(const PlantModel& plant, const WeightSpec& weights,
                                               const ChannelModel& channel);
PredictionOperators build_prediction_operators(const Scenario& s);

/// Same operators with a different channel-mean diagonal (length Nm).
PredictionOperators with_upsilon(PredictionOperators ops, const Vector& upsilon_bar);
/// Shared scalar channel: every diagonal entry equals t.
PredictionOperators with_scalar_upsilon(PredictionOperators ops, double t);
/// Stationary per-channel means mu (length m), stacked over the horizon.
PredictionOperators with_channel_means(PredictionOperators ops, const Vector& mu);

}  // namespace nclab
