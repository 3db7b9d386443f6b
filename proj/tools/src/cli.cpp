#include "nclab_cli/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nclab/allocation.hpp"
#include "nclab/analysis.hpp"
#include "nclab/simulator.hpp"

namespace nclab::cli {

using nlohmann::ordered_json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Round-trips through the 9-digit text form so JSON output carries 9 significant digits.
double r9(double v) {
  if (!std::isfinite(v)) return v;
  return std::strtod(format_number(v).c_str(), nullptr);
}

ordered_json vec_json(const Vector& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(r9(v(i)));
  return a;
}

ordered_json mat_json(const Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vec_json(m.row(r).transpose()));
  return rows;
}

struct Options {
  std::string scenario;
  std::string protocol;
  std::string output;
  std::optional<double> upsilon;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  bool scalar = false;
  bool full = false;
  int points = 99;
  double from = 0.01;
  double to = 0.99;
  std::string mode = "open";
  std::optional<int> steps;
  std::optional<int> replicates;
  double alpha = 0.0;
  std::vector<double> beta;
  double resolution = 0.01;
};

Scenario load(const Options& o) {
  Scenario s = load_scenario(o.scenario);
  if (o.upsilon) {
    if (!(*o.upsilon > 0.0 && *o.upsilon <= 1.0)) throw ValidationError({"channel mean must lie in (0,1]"});
    s = with_uniform_channel(s, *o.upsilon);
  }
  if (const char* env = std::getenv("NCLAB_SEED"); env && *env) {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw UsageError("NCLAB_SEED must be an unsigned integer");
    s.sim.seed = v;
  }
  if (o.seed) s.sim.seed = *o.seed;
  return s;
}

Protocol protocol_of(const Options& o) {
  if (o.protocol.empty()) throw UsageError("--protocol is required for this command");
  try {
    return parse_protocol(o.protocol);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

void emit(const ordered_json& j, std::ostream& out) { out << j.dump(2) << '\n'; }

// Writes CSV text to --output, or to `out` when no path was given.
void write_text(const Options& o, const std::string& text, std::ostream& out) {
  if (o.output.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.output);
  if (!f) throw std::runtime_error("cannot write " + o.output);
  f << text;
}

int cmd_synthesize(const Options& o, std::ostream& out) {
  const auto s = load(o);
  const auto p = protocol_of(o);
  const auto law = synthesize(build_prediction_operators(s), p);
  ordered_json j;
  j["protocol"] = to_string(p);
  j["first_gain"] = mat_json(law.first_gain);
  if (o.full) {
    j["gain"] = mat_json(law.gain);
    j["gram"] = mat_json(law.gram);
  }
  emit(j, out);
  return ok;
}

int cmd_cost(const Options& o, std::ostream& out) {
  const auto s = load(o);
  const auto p = protocol_of(o);
  const auto c = expected_cost(build_prediction_operators(s), p, s.eval_state);
  ordered_json j;
  j["protocol"] = to_string(p);
  j["total"] = r9(c.total);
  j["constant"] = r9(c.constant_term);
  j["reduction"] = r9(c.reduction_term);
  emit(j, out);
  return ok;
}

int cmd_gap(const Options& o, std::ostream& out) {
  const auto s = load(o);
  const auto g = cost_gap(build_prediction_operators(s), s.eval_state);
  ordered_json j;
  j["j_tcp"] = r9(g.j_tcp);
  j["j_udp"] = r9(g.j_udp);
  j["gap"] = r9(g.gap);
  emit(j, out);
  return ok;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  if (o.points < 1) throw UsageError("--points must be >= 1");
  if (!(o.from > 0.0 && o.to <= 1.0 && o.from <= o.to)) throw UsageError("sweep range must satisfy 0 < from <= to <= 1");
  const auto s = load(o);
  const auto base = build_prediction_operators(s);
  const int m = s.plant.m();
  const int axes = (o.scalar || m == 1) ? 1 : m;
  std::vector<double> values(static_cast<std::size_t>(o.points));
  for (int i = 0; i < o.points; ++i)
    values[i] = o.points == 1 ? o.from : o.from + (o.to - o.from) * i / (o.points - 1);

  std::ostringstream csv;
  for (int i = 1; i <= axes; ++i) csv << "mu_" << i << ',';
  csv << "j_tcp,j_udp,gap\n";
  std::vector<int> idx(static_cast<std::size_t>(axes), 0);
  std::size_t rows = 0;
  while (true) {
    Vector mu(m);
    for (int i = 0; i < m; ++i) mu(i) = values[idx[axes == 1 ? 0 : i]];
    const auto g = cost_gap(with_channel_means(base, mu), s.eval_state);
    for (int i = 0; i < axes; ++i) csv << format_number(values[idx[i]]) << ',';
    csv << format_number(g.j_tcp) << ',' << format_number(g.j_udp) << ',' << format_number(g.gap) << '\n';
    ++rows;
    int pos = axes - 1;
    while (pos >= 0 && ++idx[pos] == o.points) idx[pos--] = 0;
    if (pos < 0) break;
  }
  write_text(o, csv.str(), out);
  if (!o.output.empty()) {
    ordered_json j;
    j["rows"] = rows;
    j["output"] = o.output;
    emit(j, out);
  }
  return ok;
}

int cmd_maxdiff(const Options& o, std::ostream& out) {
  const auto s = load(o);
  if (s.plant.m() > 1 && !o.scalar)
    throw UsageError("maxdiff needs a shared scalar channel: the scenario has " + std::to_string(s.plant.m()) +
                     " channels; pass --scalar to analyse the shared mean t*1");
  const auto r = maximal_gap(build_prediction_operators(s), s.eval_state);
  ordered_json j;
  j["maximizer"] = r9(r.maximizer);
  j["gap_at_max"] = r9(r.gap_at_max);
  j["method"] = to_string(r.method);
  j["grid_maximizer"] = r9(r.grid_maximizer);
  j["analytic_maximizer"] = r.analytic_maximizer ? ordered_json(r9(*r.analytic_maximizer)) : ordered_json(nullptr);
  ordered_json cands = ordered_json::array();
  for (const auto& c : r.candidates) {
    if (!c.valid()) continue;
    cands.push_back({{"value", r9(c.value)},
                     {"lambda", r9(c.lambda)},
                     {"residual", r9(c.residual)},
                     {"eigen_condition", c.eigen_condition}});
  }
  j["valid_candidates"] = cands;
  j["candidate_count"] = r.candidates.size();
  emit(j, out);
  return ok;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const auto s = load(o);
  const auto p = protocol_of(o);
  TrajectoryRecord rec;
  if (o.mode == "open") {
    rec = open_loop_rollout(s, p, s.sim.seed);
  } else if (o.mode == "receding") {
    const int steps = o.steps.value_or(s.sim.steps > 0 ? s.sim.steps : s.weights.horizon);
    if (steps < 1) throw UsageError("steps must be ≥ 1");
    rec = receding_horizon_sim(s, p, steps, s.sim.seed);
  } else {
    throw UsageError("--mode must be open or receding");
  }
  if (!o.output.empty()) {
    std::ostringstream csv;
    write_trajectory_csv(rec, csv);
    write_text(o, csv.str(), out);
  }
  ordered_json j;
  j["protocol"] = to_string(p);
  j["mode"] = o.mode;
  j["seed"] = rec.seed;
  j["steps"] = rec.inputs.size();
  j["realized_cost"] = r9(rec.realized_cost);
  j["final_state"] = vec_json(rec.states.back());
  emit(j, out);
  return ok;
}

int cmd_montecarlo(const Options& o, std::ostream& out) {
  const auto s = load(o);
  const auto p = protocol_of(o);
  const int reps = o.replicates.value_or(s.sim.replicates);
  if (reps < 2) throw UsageError("replicates must be ≥ 2");
  const auto st = monte_carlo_cost(s, p, reps, s.sim.seed, o.threads);
  const auto ops = build_prediction_operators(s);
  ordered_json j;
  j["protocol"] = to_string(p);
  j["mean_cost"] = r9(st.mean_cost);
  j["std_error"] = r9(st.std_error);
  j["replicates"] = st.replicates;
  j["base_seed"] = st.base_seed;
  j["seed_rule"] = st.seed_rule;
  j["expected_cost"] = r9(expected_cost(ops, p, s.eval_state).total);
  j["open_loop_expectation"] =
      r9(sequence_expected_cost(ops, optimal_sequence(synthesize(ops, p), s.eval_state), s.eval_state));
  emit(j, out);
  return ok;
}

int cmd_eigs(const Options& o, std::ostream& out) {
  const auto s = load(o);
  const auto p = protocol_of(o);
  const auto ev = closed_loop_eigenvalues(synthesize(build_prediction_operators(s), p), s.plant);
  ordered_json arr = ordered_json::array();
  for (const auto& e : ev) arr.push_back({{"re", r9(e.real())}, {"im", r9(e.imag())}});
  ordered_json j;
  j["protocol"] = to_string(p);
  j["eigenvalues"] = arr;
  emit(j, out);
  return ok;
}

int cmd_allocate(const Options& o, std::ostream& out) {
  const auto s = load(o);
  const auto p = protocol_of(o);
  Vector beta;
  if (!o.beta.empty()) beta = Eigen::Map<const Vector>(o.beta.data(), static_cast<Eigen::Index>(o.beta.size()));
  else if (s.channel.beta.size() != 0) beta = s.channel.beta;
  else beta = Vector::Ones(s.plant.m());
  if (beta.size() != s.plant.m()) throw UsageError("--beta needs one value per channel");
  if (!(o.resolution > 0.0 && o.resolution <= 0.5)) throw UsageError("--resolution must lie in (0, 0.5]");
  const auto rep = optimize_allocation(build_prediction_operators(s), p, o.alpha, beta, s.eval_state, o.resolution);
  if (!o.output.empty()) {
    std::ostringstream csv;
    write_frontier_csv(rep, csv);
    write_text(o, csv.str(), out);
  }
  ordered_json j;
  j["protocol"] = to_string(p);
  j["alpha"] = r9(rep.alpha);
  j["m_star"] = vec_json(rep.m_star);
  j["comm_cost"] = r9(rep.comm_cost);
  j["control_cost"] = r9(rep.control_cost);
  j["grid_m_star"] = vec_json(rep.grid_m_star);
  j["grid_resolution"] = r9(rep.grid_resolution);
  emit(j, out);
  return ok;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Controller synthesis and analysis over lossy actuation channels", "nclab"};
  app.require_subcommand(1);
  Options o;

  struct Spec {
    const char* name;
    const char* help;
    int (*fn)(const Options&, std::ostream&);
  };
  const Spec specs[] = {
      {"synthesize", "Optimal control law (gain matrices)", cmd_synthesize},
      {"cost", "Expected optimal cost at the evaluation state", cmd_cost},
      {"gap", "UDP minus TCP expected cost", cmd_gap},
      {"sweep", "Costs and gap over a grid of channel means (CSV)", cmd_sweep},
      {"maxdiff", "Shared channel mean that maximizes the gap", cmd_maxdiff},
      {"simulate", "One seeded closed-loop rollout", cmd_simulate},
      {"montecarlo", "Monte Carlo mean of the realized open-loop cost", cmd_montecarlo},
      {"eigs", "Closed-loop eigenvalues of A - B K_first", cmd_eigs},
      {"allocate", "Cheapest channel means meeting a cost budget", cmd_allocate},
  };

  for (const auto& spec : specs) {
    auto* sub = app.add_subcommand(spec.name, spec.help);
    const std::string name = spec.name;
    sub->add_option("--scenario", o.scenario, "Scenario JSON file")->required();
    sub->add_option("--upsilon", o.upsilon, "Override every channel mean with this value");
    sub->add_option("--seed", o.seed, "Seed (overrides NCLAB_SEED and the scenario)");
    sub->add_option("--threads", o.threads, "Worker thread cap")->check(CLI::PositiveNumber);
    sub->add_option("--output,-o", o.output, "Output file for CSV data");
    if (name != "gap" && name != "sweep" && name != "maxdiff")
      sub->add_option("--protocol,-p", o.protocol, "tcp or udp");
    if (name == "synthesize") sub->add_flag("--full", o.full, "Include stacked gain and Gram matrix");
    if (name == "sweep" || name == "maxdiff") sub->add_flag("--scalar", o.scalar, "Use one shared channel mean");
    if (name == "sweep") {
      sub->add_option("--points", o.points, "Grid points per axis");
      sub->add_option("--from", o.from, "Smallest channel mean");
      sub->add_option("--to", o.to, "Largest channel mean");
    }
    if (name == "simulate") {
      sub->add_option("--mode", o.mode, "open or receding");
      sub->add_option("--steps", o.steps, "Steps for receding-horizon mode");
    }
    if (name == "montecarlo") sub->add_option("--replicates", o.replicates, "Number of replicates");
    if (name == "allocate") {
      sub->add_option("--alpha", o.alpha, "Control-cost budget")->required();
      sub->add_option("--beta", o.beta, "Per-channel price")->expected(1, -1);
      sub->add_option("--resolution", o.resolution, "Grid resolution");
    }
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? ok : usage_error;
  }

  for (const auto& spec : specs) {
    if (!app.got_subcommand(spec.name)) continue;
    try {
      return spec.fn(o, out);
    } catch (const UsageError& e) {
      err << "usage error: " << e.what() << '\n';
      return usage_error;
    } catch (const ValidationError& e) {
      for (const auto& v : e.violations()) err << "invalid scenario: " << v << '\n';
      return validation_error;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return validation_error;
    }
  }
  return usage_error;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace nclab::cli
