#include "nclab/allocation.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace nclab {

namespace {

std::vector<double> channel_grid(double resolution) {
  const int count = static_cast<int>(std::floor(1.0 / resolution + 1e-9));
  std::vector<double> g;
  for (int k = 1; k <= count; ++k) g.push_back(k * resolution);
  if (g.empty() || g.back() < 1.0 - 1e-12) g.push_back(1.0);
  else g.back() = 1.0;
  return g;
}

bool lexicographically_less(const Vector& a, const Vector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) < b(i)) return true;
    if (a(i) > b(i)) return false;
  }
  return false;
}

}  // namespace

double communication_cost(const Vector& mu, const Vector& beta) {
  if (mu.size() != beta.size()) throw std::invalid_argument("mu and beta lengths differ");
  if ((beta.array() < 0.0).any()) throw std::invalid_argument("beta must be nonnegative");
  return beta.dot(mu);
}

double control_cost(const PredictionOperators& ops, const Vector& mu, Protocol p, const Vector& x) {
  return expected_cost(with_channel_means(ops, mu), p, x).total;
}

bool is_feasible(const PredictionOperators& ops, const Vector& mu, Protocol p, double alpha, const Vector& x) {
  if ((mu.array() <= 0.0).any() || (mu.array() > 1.0).any())
    throw std::invalid_argument("channel mean must lie in (0,1]");
  return control_cost(ops, mu, p, x) <= alpha;
}

AllocationReport optimize_allocation(const PredictionOperators& ops, Protocol p, double alpha, const Vector& beta,
                                     const Vector& x, double resolution) {
  if (!(resolution > 0.0 && resolution <= 0.5)) throw std::invalid_argument("resolution must lie in (0, 0.5]");
  const int m = ops.m;
  if (beta.size() != m) throw std::invalid_argument("beta length must equal m");
  if ((beta.array() < 0.0).any()) throw std::invalid_argument("beta must be nonnegative");
  if (!is_feasible(ops, Vector::Ones(m), p, alpha, x)) throw std::runtime_error("budget infeasible");

  const std::vector<double> grid = channel_grid(resolution);
  const int g = static_cast<int>(grid.size());

  AllocationReport rep;
  rep.alpha = alpha;
  rep.protocol = p;
  rep.grid_resolution = resolution;
  bool have_best = false;
  double best_cost = 0.0;

  // Odometer over the first m-1 channels; the last channel is found by binary
  // search, which is valid because feasibility is monotone in every mean.
  std::vector<int> idx(static_cast<std::size_t>(m - 1), 0);
  Vector mu(m);
  while (true) {
    for (int i = 0; i < m - 1; ++i) mu(i) = grid[idx[i]];
    mu(m - 1) = 1.0;
    FrontierSample sample;
    if (is_feasible(ops, mu, p, alpha, x)) {
      int lo = -1;  // infeasible (or below the grid)
      int hi = g - 1;
      while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        mu(m - 1) = grid[mid];
        if (is_feasible(ops, mu, p, alpha, x)) hi = mid;
        else lo = mid;
      }
      mu(m - 1) = grid[hi];
      sample.feasible = true;
    }
    sample.mu = mu;
    sample.control_cost = control_cost(ops, mu, p, x);
    sample.comm_cost = communication_cost(mu, beta);
    rep.frontier.push_back(sample);

    if (sample.feasible) {
      const double tol = 1e-12 * std::max(1.0, std::abs(best_cost));
      const bool better = !have_best || sample.comm_cost < best_cost - tol ||
                          (std::abs(sample.comm_cost - best_cost) <= tol && lexicographically_less(mu, rep.m_star));
      if (better) {
        have_best = true;
        best_cost = sample.comm_cost;
        rep.m_star = mu;
      }
    }

    int pos = m - 2;
    while (pos >= 0 && ++idx[pos] == g) idx[pos--] = 0;
    if (pos < 0) break;
  }
  if (!have_best) throw std::runtime_error("budget infeasible");
  rep.grid_m_star = rep.m_star;

  // Shrink each priced channel towards the next lower grid value while feasible.
  for (int i = 0; i < m; ++i) {
    if (beta(i) <= 0.0) continue;
    double b = rep.m_star(i);
    double a = std::max(0.0, b - resolution);
    Vector trial = rep.m_star;
    while (b - a > 1e-6) {
      const double mid = 0.5 * (a + b);
      trial(i) = mid;
      if (mid > 0.0 && is_feasible(ops, trial, p, alpha, x)) b = mid;
      else a = mid;
    }
    rep.m_star(i) = b;
  }
  rep.comm_cost = communication_cost(rep.m_star, beta);
  rep.control_cost = control_cost(ops, rep.m_star, p, x);
  return rep;
}

void write_frontier_csv(const AllocationReport& report, std::ostream& out) {
  const auto m = report.m_star.size();
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return std::string(buf);
  };
  for (Eigen::Index i = 1; i <= m; ++i) out << "mu_" << i << ',';
  out << "control_cost,comm_cost,feasible\n";
  for (const auto& s : report.frontier) {
    for (Eigen::Index i = 0; i < s.mu.size(); ++i) out << num(s.mu(i)) << ',';
    out << num(s.control_cost) << ',' << num(s.comm_cost) << ',' << (s.feasible ? 1 : 0) << '\n';
  }
}

}  // namespace nclab
