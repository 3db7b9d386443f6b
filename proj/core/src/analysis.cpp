#include "nclab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>

namespace nclab {

namespace {

void require_open_unit(double u) {
  if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("upsilon must lie in (0,1)");
}

// G_F(u) = (u Omega_g + Psi)^{-1} and G_G(u) = (u Omega_h + Omega_d + Psi)^{-1},
// kept as factorizations.
struct ScalarMaps {
  Eigen::LLT<Matrix> f;
  Eigen::LLT<Matrix> g;
};

ScalarMaps scalar_maps(const PredictionOperators& ops, double u) {
  Matrix gf = u * ops.omega_g + ops.psi;
  Matrix gg = u * ops.omega_h + ops.psi;
  gg.diagonal() += ops.omega_d;
  ScalarMaps maps{Eigen::LLT<Matrix>(gf), Eigen::LLT<Matrix>(gg)};
  if (maps.f.info() != Eigen::Success || maps.g.info() != Eigen::Success)
    throw std::runtime_error("shared-channel maps are not positive definite");
  return maps;
}

double spectral_norm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double max_rayleigh(const Matrix& f) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (f + f.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double logistic(double s) { return 1.0 / (1.0 + std::exp(-s)); }

}  // namespace

std::string to_string(MaxMethod m) { return m == MaxMethod::analytic_roots ? "analytic_roots" : "grid_fallback"; }

GapReport cost_gap(const PredictionOperators& ops, const Vector& x) {
  const double c = constant_term(ops, x);
  const double rt = reduction_term(ops, Protocol::tcp_like, x);
  const double ru = reduction_term(ops, Protocol::udp_like, x);
  return GapReport{c - rt, c - ru, rt - ru};
}

double scalar_cost_gap(const PredictionOperators& ops, double upsilon, const Vector& x) {
  require_open_unit(upsilon);
  const auto maps = scalar_maps(ops, upsilon);
  const Vector a = ops.omega_gp * x;
  const Vector fa = maps.f.solve(a);
  const Vector ga = maps.g.solve(a);
  return upsilon * (1.0 - upsilon) * ga.dot(ops.omega_d.cwiseProduct(fa));
}

Matrix derivative_kernel(const PredictionOperators& ops, double u) {
  const auto maps = scalar_maps(ops, u);
  const Matrix od = ops.omega_d_matrix();
  const Matrix inner = (1.0 - 2.0 * u) * od -
                       u * (1.0 - u) * (ops.omega_h * maps.g.solve(od) + od * maps.f.solve(ops.omega_g));
  // G_G inner G_F
  const Matrix right = maps.f.solve(inner.transpose()).transpose();
  return maps.g.solve(right);
}

double gap_derivative(const PredictionOperators& ops, double upsilon, const Vector& x) {
  require_open_unit(upsilon);
  const Vector a = ops.omega_gp * x;
  return a.dot(derivative_kernel(ops, upsilon) * a);
}

RootPencil root_pencil(const PredictionOperators& ops) {
  const Vector psi = ops.psi_diag();
  const Vector inv_d = ops.omega_d.cwiseInverse();
  RootPencil p;
  Matrix g_plus_psi = ops.omega_g + ops.psi;
  p.t = ops.omega_g * inv_d.asDiagonal() * g_plus_psi +
        psi.cwiseProduct(inv_d).asDiagonal() * ops.omega_h;
  p.t = 0.5 * (p.t + p.t.transpose()).eval();
  p.h = psi.cwiseProduct(inv_d).cwiseProduct(ops.omega_d + psi);
  return p;
}

double determinant_residual(const RootPencil& pencil, double u) {
  Matrix pu = u * u * pencil.t;
  pu.diagonal() += (2.0 * u - 1.0) * pencil.h;
  Eigen::JacobiSVD<Matrix> svd(pu);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  const double nt = spectral_norm(pencil.t);
  const double nh = pencil.h.cwiseAbs().maxCoeff();
  return smin / (nt * u * u + 2.0 * nh * std::abs(u) + nh);
}

double determinant_residual(const PredictionOperators& ops, double u) {
  return determinant_residual(root_pencil(ops), u);
}

std::vector<RootCandidate> determinant_root_candidates(const PredictionOperators& ops, double eigen_tol) {
  const RootPencil pencil = root_pencil(ops);
  // T H^{-1} is similar to the symmetric H^{-1/2} T H^{-1/2}.
  const Vector hs = pencil.h.cwiseSqrt().cwiseInverse();
  const Matrix sym = hs.asDiagonal() * pencil.t * hs.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (sym + sym.transpose()), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigenvalue solver did not converge");

  const double scale = spectral_norm(derivative_kernel(ops, 0.5));
  std::vector<RootCandidate> out;
  out.reserve(2 * es.eigenvalues().size());
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double lambda = es.eigenvalues()(i);
    for (int sign : {+1, -1}) {
      RootCandidate c;
      c.lambda = lambda;
      c.real = 1.0 + lambda >= 0.0;
      if (c.real) {
        c.value = 1.0 / (1.0 + sign * std::sqrt(1.0 + lambda));
        c.in_unit_interval = std::isfinite(c.value) && c.value >= 0.0 && c.value <= 1.0;
        c.residual = std::isfinite(c.value) ? determinant_residual(pencil, c.value)
                                            : std::numeric_limits<double>::quiet_NaN();
        if (c.in_unit_interval && c.value > 0.0 && c.value < 1.0)
          c.eigen_condition = std::abs(max_rayleigh(derivative_kernel(ops, c.value))) <= eigen_tol * scale;
      } else {
        c.value = std::numeric_limits<double>::quiet_NaN();
        c.residual = std::numeric_limits<double>::quiet_NaN();
      }
      out.push_back(c);
    }
  }
  return out;
}

MaxDiffReport maximal_gap(const PredictionOperators& ops, const Vector& x, double eigen_tol) {
  MaxDiffReport r;
  r.candidates = determinant_root_candidates(ops, eigen_tol);
  for (std::size_t i = 0; i < r.candidates.size(); i += 2) r.lambdas.push_back(r.candidates[i].lambda);

  for (const auto& c : r.candidates) {
    if (!c.valid() || !c.eigen_condition) continue;
    const double g = scalar_cost_gap(ops, c.value, x);
    if (!r.analytic_maximizer || g > scalar_cost_gap(ops, *r.analytic_maximizer, x)) r.analytic_maximizer = c.value;
  }

  // Grid uniform in logit(u): resolves peaks near either end of (0,1).
  constexpr int points = 1000;
  const double lo = std::log(1e-6 / (1.0 - 1e-6));
  std::vector<double> grid(points);
  std::vector<double> gaps(points);
  for (int i = 0; i < points; ++i) {
    grid[i] = logistic(lo + (-2.0 * lo) * i / (points - 1));
    gaps[i] = scalar_cost_gap(ops, grid[i], x);
  }
  const auto best = static_cast<int>(std::max_element(gaps.begin(), gaps.end()) - gaps.begin());
  const double a = best > 0 ? grid[best - 1] : 0.5 * grid[0];
  const double b = best < points - 1 ? grid[best + 1] : 0.5 * (1.0 + grid[points - 1]);
  auto neg_gap = [&](double u) { return -scalar_cost_gap(ops, u, x); };
  const auto refined = boost::math::tools::brent_find_minima(neg_gap, a, b, 40);
  r.grid_maximizer = refined.first;
  r.grid_gap = -refined.second;
  if (r.grid_gap < gaps[best]) {
    r.grid_maximizer = grid[best];
    r.grid_gap = gaps[best];
  }

  if (r.analytic_maximizer) {
    const double g = scalar_cost_gap(ops, *r.analytic_maximizer, x);
    if (g >= r.grid_gap * (1.0 - 1e-9)) {
      r.method = MaxMethod::analytic_roots;
      r.maximizer = *r.analytic_maximizer;
      r.gap_at_max = g;
      return r;
    }
  }
  r.method = MaxMethod::grid_fallback;
  r.maximizer = r.grid_maximizer;
  r.gap_at_max = r.grid_gap;
  return r;
}

std::vector<double> monotonic_sweep(const PredictionOperators& ops, const std::vector<Vector>& grid, Protocol p,
                                    const Vector& x) {
  auto expand = [&](const Vector& mu) -> Vector {
    if (mu.size() == ops.m) return mu.replicate(ops.horizon, 1);
    if (mu.size() == ops.size()) return mu;
    throw std::invalid_argument("grid entry length must be m or N*m");
  };
  std::vector<Vector> full;
  full.reserve(grid.size());
  for (const auto& mu : grid) {
    full.push_back(expand(mu));
    if ((full.back().array() <= 0.0).any() || (full.back().array() > 1.0).any())
      throw std::invalid_argument("channel mean must lie in (0,1]");
  }
  for (std::size_t j = 1; j < full.size(); ++j)
    if (!(full[j].array() > full[j - 1].array()).all())
      throw std::invalid_argument("grid is not strictly ordered");
  std::vector<double> costs;
  costs.reserve(full.size());
  for (const auto& ups : full) costs.push_back(expected_cost(with_upsilon(ops, ups), p, x).total);
  return costs;
}

Vector iso_cost_direction(const PredictionOperators& ops, const Vector& udp_means, const Vector& x) {
  if (udp_means.size() != ops.m) throw std::invalid_argument("channel mean length must equal m");
  if ((udp_means.array() <= 0.0).any() || (udp_means.array() > 1.0).any())
    throw std::invalid_argument("channel mean must lie in (0,1]");
  const double target = expected_cost(with_channel_means(ops, udp_means), Protocol::udp_like, x).total;
  auto excess = [&](double s) {
    return expected_cost(with_channel_means(ops, s * udp_means), Protocol::tcp_like, x).total - target;
  };
  const double hi = 1.0;
  const double lo = 1e-12;
  const double f_hi = excess(hi);
  if (f_hi >= 0.0) return udp_means;
  if (excess(lo) <= 0.0) throw std::runtime_error("no root bracketed");
  // Bisection until the cost matches to 1e-9 relative or the bracket collapses.
  double a = lo;
  double b = hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (a + b);
    const double f = excess(mid);
    if (std::abs(f) <= 1e-12 * std::abs(target)) return mid * udp_means;
    if (f > 0.0) a = mid;
    else b = mid;
    if (b - a <= 1e-15 * b) break;
  }
  return 0.5 * (a + b) * udp_means;
}

double iso_cost_transmission(const PredictionOperators& ops, double udp_mean, const Vector& x) {
  return iso_cost_direction(ops, Vector::Constant(ops.m, udp_mean), x)(0);
}

}  // namespace nclab
