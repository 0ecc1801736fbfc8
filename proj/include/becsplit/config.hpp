#pragma once

// Run configuration. Every section is optional in the file; missing keys
// keep the defaults below, unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "becsplit/moment_ocp.hpp"
#include "becsplit/square_pulse.hpp"

namespace becsplit {

inline constexpr int kConfigSchemaVersion = 1;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelSection {
  int order = 20;
  int n_plus = 9;
  int n_plus_val = 24;
  double delta = 0.1;
};

struct OcpSection {
  double horizon = 3.0;
  double dt = 0.001;
  double omega_min = 0.0;
  double omega_max = 100.0;
  double slew_min = -500.0;
  double slew_max = 500.0;
  double lambda = 1e-2;
  double lambda_max = 1e8;
  std::optional<double> tolerance;  // null or absent: 0.02 * ||m(0)||
  int max_iters = 200;
  int coarsen = 1;
  double qp_tol = 1e-4;  // KKT tolerance relative to |H'f|_inf
  int qp_max_iters = 20000;
  InitialGuess initial_guess;
  std::uint64_t seed = 1;
};

struct SquareSection {
  int m = 1;
  int restarts = 20;
  int max_evaluations = 3000;
  double omega_max = 60.0;
  double tau_max = 3.5;
  double failure_threshold = 0.5;
};

struct EvaluateSection {
  int quadrature_nodes = 64;
  int curve_points = 201;
  std::vector<std::string> artifacts;
};

struct SweepCase {
  int n = 1;
  double delta = 0.1;
};

struct SweepSection {
  std::vector<SweepCase> cases;
  // One moment design per entry (0: positive, -100: real-valued).
  std::vector<double> omega_min{0.0};
  // One square design per sample count; 1 is the nominal design.
  std::vector<int> square_m{1};
};

struct OutputSection {
  std::string directory = "runs";
  bool csv = true;
  bool json = true;
};

struct RunConfig {
  int schema_version = kConfigSchemaVersion;
  ModelSection model;
  int target_n = 1;
  OcpSection ocp;
  SquareSection square;
  EvaluateSection evaluate;
  SweepSection sweep;
  OutputSection output;

  // Throws ConfigError naming the first violated invariant.
  void validate() const;

  OcpConfig ocp_config() const;
  OcpConfig ocp_config(int n, double delta, double omega_min) const;
  TargetSpec validation_target() const { return TargetSpec(target_n, model.n_plus_val); }
  SquareBounds square_bounds() const;
  SquareOptimizerOptions square_options() const;
};

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& c);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace becsplit
