#pragma once

// Reference computations used by the tests. They are written from the model
// definitions (step-by-step dynamics, enumeration of packet outcomes, black-box
// minimization) and deliberately avoid the stacked operators under test.

#include <cmath>
#include <functional>
#include <random>
#include <string>

#include "nclab/scenario.hpp"

namespace oracle {

using nclab::Matrix;
using nclab::Vector;

inline std::string data_path(const std::string& name) { return std::string(NCLAB_DATA_DIR) + "/" + name; }

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

inline Matrix random_spd(std::mt19937_64& gen, int n, double shift = 0.2) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix l(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) l(i, j) = nd(gen);
  Matrix s = l * l.transpose() / n;
  s.diagonal().array() += shift;
  return s;
}

struct RandomSpec {
  int max_n = 4;
  int max_m = 3;
  int max_horizon = 10;
  double mu_lo = 0.05;
  double mu_hi = 0.95;
  int max_nm = 1 << 20;  // cap on horizon * m
};

/// Random valid scenario: stable-ish dynamics, SPD weights, diagonal input penalty.
inline nclab::Scenario random_scenario(std::mt19937_64& gen, const RandomSpec& spec = {}) {
  std::uniform_int_distribution<int> dn(1, spec.max_n);
  std::uniform_int_distribution<int> dm(1, spec.max_m);
  std::uniform_real_distribution<double> dmu(spec.mu_lo, spec.mu_hi);
  std::uniform_real_distribution<double> dpsi(0.2, 2.0);
  std::normal_distribution<double> nd(0.0, 1.0);
  const int n = dn(gen);
  const int m = dm(gen);
  int horizon = std::uniform_int_distribution<int>(1, spec.max_horizon)(gen);
  while (horizon * m > spec.max_nm && horizon > 1) --horizon;

  nclab::Scenario s;
  s.plant.a = Matrix(n, n);
  s.plant.b = Matrix(n, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) s.plant.a(i, j) = 0.5 * nd(gen);
    for (int j = 0; j < m; ++j) s.plant.b(i, j) = nd(gen);
  }
  s.plant.sigma_w = 0.01 * random_spd(gen, n);
  s.plant.x0_mean = Vector(n);
  for (int i = 0; i < n; ++i) s.plant.x0_mean(i) = nd(gen);
  s.plant.x0_cov = Matrix::Identity(n, n);
  s.weights.horizon = horizon;
  s.weights.q = random_spd(gen, n);
  for (int k = 0; k < horizon; ++k) {
    s.weights.omega_steps.push_back(random_spd(gen, n));
    Vector psi(m);
    for (int i = 0; i < m; ++i) psi(i) = dpsi(gen);
    s.weights.psi_steps.push_back(psi.asDiagonal());
  }
  Vector mu(m);
  for (int i = 0; i < m; ++i) mu(i) = dmu(gen);
  s.channel.means = {mu};
  s.eval_state = s.plant.x0_mean;
  s.sim.replicates = 100;
  return s;
}

/// Channel mean applying at horizon step k of a stacked mean vector.
inline Vector step_means(const Vector& ups, int m, int k) { return ups.segment(k * m, m); }

/// E[U' Y W Y U] by summing over every 0/1 pattern of Y.
inline double enumerate_bernoulli(const Matrix& w, const Vector& ups, const Vector& u) {
  const int d = static_cast<int>(u.size());
  double total = 0.0;
  for (long mask = 0; mask < (1L << d); ++mask) {
    double prob = 1.0;
    Vector yu = Vector::Zero(d);
    for (int i = 0; i < d; ++i) {
      if (mask & (1L << i)) {
        prob *= ups(i);
        yu(i) = u(i);
      } else {
        prob *= 1.0 - ups(i);
      }
    }
    if (prob != 0.0) total += prob * yu.dot(w * yu);
  }
  return total;
}

/// Stepwise states x_1..x_N under applied inputs, stacked.
inline Vector iterate_plant(const nclab::Scenario& s, const Vector& x0, const Vector& applied, const Vector& noise) {
  const int n = s.plant.n();
  const int m = s.plant.m();
  const int horizon = s.weights.horizon;
  Vector out(horizon * n);
  Vector x = x0;
  for (int k = 0; k < horizon; ++k) {
    x = s.plant.a * x + s.plant.b * applied.segment(k * m, m) + noise.segment(k * n, n);
    out.segment(k * n, n) = x;
  }
  return out;
}

/// sum_k tr(Omega_k P_k) with P propagated as A P A' + Sigma_W from P_0 = 0.
inline double noise_cost(const nclab::Scenario& s) {
  const int n = s.plant.n();
  Matrix p = Matrix::Zero(n, n);
  double total = 0.0;
  for (int k = 0; k < s.weights.horizon; ++k) {
    p = s.plant.a * p * s.plant.a.transpose() + s.plant.sigma_w;
    total += (s.weights.omega_steps[k] * p).trace();
  }
  return total;
}

inline double state_cost(const nclab::Scenario& s, const Vector& x0, const Vector& states) {
  const int n = s.plant.n();
  double c = x0.dot(s.weights.q * x0);
  for (int k = 0; k < s.weights.horizon; ++k) {
    const Vector xk = states.segment(k * n, n);
    c += xk.dot(s.weights.omega_steps[k] * xk);
  }
  return c;
}

inline double input_cost(const nclab::Scenario& s, const Vector& applied) {
  const int m = s.plant.m();
  double c = 0.0;
  for (int k = 0; k < s.weights.horizon; ++k) {
    const Vector uk = applied.segment(k * m, m);
    c += uk.dot(s.weights.psi_steps[k] * uk);
  }
  return c;
}

/// Exact expected realized cost of applying U open loop, by enumerating every
/// packet pattern and stepping the plant (noise enters additively).
inline double open_loop_expectation(const nclab::Scenario& s, const Vector& ups, const Vector& u, const Vector& x0) {
  const int d = static_cast<int>(u.size());
  const Vector zero_noise = Vector::Zero(s.weights.horizon * s.plant.n());
  double total = 0.0;
  for (long mask = 0; mask < (1L << d); ++mask) {
    double prob = 1.0;
    Vector applied = Vector::Zero(d);
    for (int i = 0; i < d; ++i) {
      if (mask & (1L << i)) {
        prob *= ups(i);
        applied(i) = u(i);
      } else {
        prob *= 1.0 - ups(i);
      }
    }
    if (prob == 0.0) continue;
    total += prob * (state_cost(s, x0, iterate_plant(s, x0, applied, zero_noise)) + input_cost(s, applied));
  }
  return total + noise_cost(s);
}

/// The objective each protocol's controller minimizes, written from its
/// definition: mean trajectory cost, Bernoulli input penalty, and the error
/// expectation (noise only for TCP; noise plus packet-outcome spread for UDP).
inline double protocol_objective(const nclab::Scenario& s, const Vector& ups, bool udp, const Vector& u,
                                 const Vector& x0) {
  const Vector mean_applied = ups.cwiseProduct(u);
  const Vector zero_noise = Vector::Zero(s.weights.horizon * s.plant.n());
  const Vector mean_states = iterate_plant(s, x0, mean_applied, zero_noise);
  double j = state_cost(s, x0, mean_states) + noise_cost(s);
  j += input_cost(s, u.cwiseProduct(ups.cwiseSqrt()));  // E[(v u)' Psi (v u)] for diagonal Psi
  if (udp) {
    // E over patterns of the deviation of the state trajectory from its mean.
    const int d = static_cast<int>(u.size());
    for (long mask = 0; mask < (1L << d); ++mask) {
      double prob = 1.0;
      Vector applied = Vector::Zero(d);
      for (int i = 0; i < d; ++i) {
        if (mask & (1L << i)) {
          prob *= ups(i);
          applied(i) = u(i);
        } else {
          prob *= 1.0 - ups(i);
        }
      }
      if (prob == 0.0) continue;
      const Vector dev = iterate_plant(s, Vector::Zero(x0.size()), applied - mean_applied, zero_noise);
      j += prob * (state_cost(s, Vector::Zero(x0.size()), dev));
    }
  }
  return j;
}

/// Minimizer of a quadratic given only as a black box, via exact central
/// differences (exact for quadratics up to rounding).
inline Vector minimize_quadratic(const std::function<double(const Vector&)>& f, int dim, double h = 1.0) {
  const Vector zero = Vector::Zero(dim);
  Vector g(dim);
  Matrix hess(dim, dim);
  for (int i = 0; i < dim; ++i) {
    Vector ei = zero;
    ei(i) = h;
    g(i) = (f(ei) - f(-ei)) / (2 * h);
    for (int j = 0; j < dim; ++j) {
      Vector ej = zero;
      ej(j) = h;
      hess(i, j) = (f(ei + ej) - f(ei - ej) - f(-ei + ej) + f(-ei - ej)) / (4 * h * h);
    }
  }
  return hess.fullPivLu().solve(-g);
}

}  // namespace oracle
