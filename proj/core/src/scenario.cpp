#include "nclab/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace nclab {

using nlohmann::json;

namespace {

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

bool all_finite(const Matrix& m) { return m.allFinite(); }

bool is_symmetric(const Matrix& m) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m - m.transpose()) <= 1e-12 * std::max(1.0, max_abs(m));
}

double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool is_diagonal(const Matrix& m) {
  Matrix off = m;
  off.diagonal().setZero();
  return max_abs(off) == 0.0;
}

std::string dims(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

// Symmetric positive definite check that reports into `out`.
void check_spd(const Matrix& m, const std::string& name, int n, std::vector<std::string>& out) {
  if (m.rows() != n || m.cols() != n) {
    out.push_back("dimension mismatch: " + name + " is " + dims(m) + " but a is " +
                  std::to_string(n) + "x" + std::to_string(n));
    return;
  }
  if (!all_finite(m)) {
    out.push_back(name + " has non-finite entries");
    return;
  }
  if (!is_symmetric(m)) {
    out.push_back(name + " asymmetric");
    return;
  }
  if (!(min_eigenvalue(m) > 0.0)) out.push_back(name + " not positive definite");
}

Matrix to_matrix(const json& j, const std::string& name) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw ParseError(name + " must be a non-empty array of rows");
  const auto rows = j.size();
  const auto cols = j[0].size();
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw ParseError(name + " has ragged rows");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) throw ParseError(name + " entries must be numbers");
      m(r, c) = j[r][c].get<double>();
    }
  }
  return m;
}

Vector to_vector(const json& j, const std::string& name) {
  if (!j.is_array()) throw ParseError(name + " must be an array");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ParseError(name + " entries must be numbers");
    v(i) = j[i].get<double>();
  }
  return v;
}

json from_matrix(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

json from_vector(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw ParseError("missing key " + where + "." + key);
  return obj.at(key);
}

// Either a single matrix (replicated) or a list of per-step matrices.
std::vector<Matrix> step_matrices(const json& w, const char* single, const char* steps,
                                  int horizon) {
  std::vector<Matrix> out;
  if (w.contains(steps)) {
    const json& arr = w.at(steps);
    if (!arr.is_array()) throw ParseError(std::string("weights.") + steps + " must be an array");
    for (std::size_t k = 0; k < arr.size(); ++k)
      out.push_back(to_matrix(arr[k], std::string("weights.") + steps + "[" + std::to_string(k) + "]"));
  } else if (w.contains(single)) {
    Matrix m = to_matrix(w.at(single), std::string("weights.") + single);
    out.assign(static_cast<std::size_t>(std::max(horizon, 0)), m);
  } else {
    throw ParseError(std::string("missing key weights.") + single + " or weights." + steps);
  }
  return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : std::runtime_error(violations.empty() ? "invalid scenario" : violations.front()),
      violations_(std::move(violations)) {}

std::vector<std::string> validate_scenario(const Scenario& s) {
  std::vector<std::string> out;
  const PlantModel& p = s.plant;
  const int n = static_cast<int>(p.a.rows());
  const int m = static_cast<int>(p.b.cols());

  if (n < 1 || p.a.cols() != n) {
    out.push_back("dimension mismatch: a must be square with n >= 1, got " + dims(p.a));
    return out;
  }
  if (!all_finite(p.a)) out.push_back("a has non-finite entries");
  if (m < 1) out.push_back("b must have at least one column");
  if (p.b.rows() != n)
    out.push_back("dimension mismatch: b has " + std::to_string(p.b.rows()) + " rows but a has " +
                  std::to_string(n));
  if (!all_finite(p.b)) out.push_back("b has non-finite entries");

  // Process noise may be degenerate (zero noise is a valid deterministic plant).
  if (p.sigma_w.rows() != n || p.sigma_w.cols() != n) {
    out.push_back("dimension mismatch: sigma_w is " + dims(p.sigma_w) + " but a is " + dims(p.a));
  } else if (!all_finite(p.sigma_w)) {
    out.push_back("sigma_w has non-finite entries");
  } else if (!is_symmetric(p.sigma_w)) {
    out.push_back("sigma_w asymmetric");
  } else if (min_eigenvalue(p.sigma_w) < -1e-12 * std::max(1.0, max_abs(p.sigma_w))) {
    out.push_back("sigma_w not positive semidefinite");
  }
  check_spd(p.x0_cov, "x0_cov", n, out);
  if (p.x0_mean.size() != n)
    out.push_back("dimension mismatch: x0_mean has length " + std::to_string(p.x0_mean.size()) +
                  " but a is " + dims(p.a));
  else if (!p.x0_mean.allFinite())
    out.push_back("x0_mean has non-finite entries");

  const int horizon = s.weights.horizon;
  if (horizon < 1) out.push_back("horizon must be >= 1");

  const ChannelModel& c = s.channel;
  if (c.means.empty()) {
    out.push_back("channel has no means");
  } else {
    bool range_ok = true;
    bool dim_ok = true;
    for (const Vector& mu : c.means) {
      if (mu.size() != m) dim_ok = false;
      for (Eigen::Index i = 0; i < mu.size(); ++i)
        if (!(mu(i) > 0.0 && mu(i) <= 1.0)) range_ok = false;
    }
    if (!dim_ok) out.push_back("dimension mismatch: channel mu length differs from b columns");
    if (!range_ok) out.push_back("channel mean must lie in (0,1]");
    if (c.scheduled && static_cast<int>(c.means.size()) != horizon)
      out.push_back("channel schedule length ≠ N");
    if (!c.scheduled && c.means.size() != 1) out.push_back("stationary channel must have one mean vector");
  }
  if (c.beta.size() != 0) {
    if (c.beta.size() != m) out.push_back("dimension mismatch: channel beta length differs from b columns");
    else if (!c.beta.allFinite() || (c.beta.array() < 0.0).any()) out.push_back("channel beta must be nonnegative");
  }

  const WeightSpec& w = s.weights;
  check_spd(w.q, "q", n, out);
  if (horizon >= 1) {
    if (static_cast<int>(w.omega_steps.size()) != horizon) out.push_back("omega_steps length ≠ N");
    if (static_cast<int>(w.psi_steps.size()) != horizon) out.push_back("psi_steps length ≠ N");
  }
  for (std::size_t k = 0; k < w.omega_steps.size(); ++k)
    check_spd(w.omega_steps[k], "omega_steps[" + std::to_string(k) + "]", n, out);
  for (std::size_t k = 0; k < w.psi_steps.size(); ++k) {
    const std::string name = "psi_steps[" + std::to_string(k) + "]";
    const std::size_t before = out.size();
    if (m >= 1) check_spd(w.psi_steps[k], name, m, out);
    if (out.size() == before && !is_diagonal(w.psi_steps[k])) out.push_back(name + " not diagonal");
  }

  if (s.eval_state.size() != n)
    out.push_back("dimension mismatch: eval_state has length " + std::to_string(s.eval_state.size()) +
                  " but a is " + dims(p.a));
  else if (!s.eval_state.allFinite())
    out.push_back("eval_state has non-finite entries");

  if (s.sim.steps < 0) out.push_back("sim.steps must be >= 0");
  if (s.sim.replicates < 2) out.push_back("sim.replicates must be >= 2");
  return out;
}

Scenario parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("scenario must be a JSON object");

  Scenario s;
  try {
    const json& pj = require(j, "plant", "");
    s.plant.a = to_matrix(require(pj, "a", "plant"), "plant.a");
    s.plant.b = to_matrix(require(pj, "b", "plant"), "plant.b");
    s.plant.sigma_w = to_matrix(require(pj, "sigma_w", "plant"), "plant.sigma_w");
    s.plant.x0_mean = to_vector(require(pj, "x0_mean", "plant"), "plant.x0_mean");
    s.plant.x0_cov = to_matrix(require(pj, "x0_cov", "plant"), "plant.x0_cov");

    const json& wj = require(j, "weights", "");
    const json& hj = require(wj, "horizon", "weights");
    if (!hj.is_number_integer()) throw ParseError("weights.horizon must be an integer");
    s.weights.horizon = hj.get<int>();
    s.weights.q = to_matrix(require(wj, "q", "weights"), "weights.q");
    s.weights.omega_steps = step_matrices(wj, "omega", "omega_steps", s.weights.horizon);
    s.weights.psi_steps = step_matrices(wj, "psi", "psi_steps", s.weights.horizon);

    const json& cj = require(j, "channel", "");
    if (cj.contains("mu_schedule")) {
      const json& arr = cj.at("mu_schedule");
      if (!arr.is_array()) throw ParseError("channel.mu_schedule must be an array");
      s.channel.scheduled = true;
      for (std::size_t k = 0; k < arr.size(); ++k)
        s.channel.means.push_back(to_vector(arr[k], "channel.mu_schedule[" + std::to_string(k) + "]"));
    } else {
      s.channel.means.push_back(to_vector(require(cj, "mu", "channel"), "channel.mu"));
    }
    if (cj.contains("beta")) s.channel.beta = to_vector(cj.at("beta"), "channel.beta");

    s.eval_state = j.contains("eval_state") ? to_vector(j.at("eval_state"), "eval_state") : s.plant.x0_mean;

    if (j.contains("sim")) {
      const json& sj = j.at("sim");
      if (sj.contains("steps")) s.sim.steps = sj.at("steps").get<int>();
      if (sj.contains("replicates")) s.sim.replicates = sj.at("replicates").get<int>();
      if (sj.contains("seed")) s.sim.seed = sj.at("seed").get<std::uint64_t>();
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad scenario field: ") + e.what());
  }

  auto violations = validate_scenario(s);
  if (!violations.empty()) throw ValidationError(std::move(violations));
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["plant"] = {{"a", from_matrix(s.plant.a)},
                {"b", from_matrix(s.plant.b)},
                {"sigma_w", from_matrix(s.plant.sigma_w)},
                {"x0_mean", from_vector(s.plant.x0_mean)},
                {"x0_cov", from_matrix(s.plant.x0_cov)}};
  json c = json::object();
  if (s.channel.scheduled) {
    json sched = json::array();
    for (const Vector& mu : s.channel.means) sched.push_back(from_vector(mu));
    c["mu_schedule"] = sched;
  } else if (!s.channel.means.empty()) {
    c["mu"] = from_vector(s.channel.means.front());
  }
  if (s.channel.beta.size() != 0) c["beta"] = from_vector(s.channel.beta);
  j["channel"] = c;

  json omega = json::array();
  for (const Matrix& m : s.weights.omega_steps) omega.push_back(from_matrix(m));
  json psi = json::array();
  for (const Matrix& m : s.weights.psi_steps) psi.push_back(from_matrix(m));
  j["weights"] = {{"q", from_matrix(s.weights.q)},
                  {"omega_steps", omega},
                  {"psi_steps", psi},
                  {"horizon", s.weights.horizon}};
  j["eval_state"] = from_vector(s.eval_state);
  j["sim"] = {{"steps", s.sim.steps}, {"replicates", s.sim.replicates}, {"seed", s.sim.seed}};
  return j.dump(2);
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scenario file " + path.string());
  out << scenario_to_json(s) << '\n';
}

Scenario with_uniform_channel(const Scenario& s, double t) {
  return with_channel_means(s, Vector::Constant(s.plant.m(), t));
}

Scenario with_channel_means(const Scenario& s, const Vector& mu) {
  Scenario out = s;
  out.channel.scheduled = false;
  out.channel.means.assign(1, mu);
  return out;
}

}  // namespace nclab
