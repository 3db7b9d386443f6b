#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nclab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct PlantModel {
  Matrix a;
  Matrix b;
  Matrix sigma_w;
  Vector x0_mean;
  Matrix x0_cov;

  int n() const { return static_cast<int>(a.rows()); }
  int m() const { return static_cast<int>(b.cols()); }
};

/// Per-channel delivery probabilities. `means` holds one vector when the
/// channel is stationary, or one vector per horizon step when `scheduled`.
struct ChannelModel {
  std::vector<Vector> means;
  bool scheduled = false;
  Vector beta;  // empty when absent

  /// Means applying at horizon step k (wraps for stationary channels).
  const Vector& at(int k) const { return scheduled ? means.at(k) : means.at(0); }
};

struct WeightSpec {
  Matrix q;
  std::vector<Matrix> omega_steps;  // length horizon after normalization
  std::vector<Matrix> psi_steps;    // length horizon after normalization
  int horizon = 0;
};

struct SimOptions {
  int steps = 0;  // 0 means "use the horizon"
  int replicates = 1000;
  std::uint64_t seed = 1;
};

struct Scenario {
  PlantModel plant;
  ChannelModel channel;
  WeightSpec weights;
  Vector eval_state;
  SimOptions sim;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Returns every violated invariant; empty when the scenario is valid.
std::vector<std::string> validate_scenario(const Scenario& s);

/// Parses a scenario from JSON text. Single omega/psi matrices are
/// replicated over the horizon and a missing eval_state defaults to x0_mean.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::filesystem::path& path);

std::string scenario_to_json(const Scenario& s);
void save_scenario(const Scenario& s, const std::filesystem::path& path);

/// Copy of `s` whose channel is the stationary shared mean t on every channel.
Scenario with_uniform_channel(const Scenario& s, double t);
/// Copy of `s` with stationary channel means `mu`.
Scenario with_channel_means(const Scenario& s, const Vector& mu);

}  // namespace nclab
