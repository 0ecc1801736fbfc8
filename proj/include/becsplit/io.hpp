#pragma once

// File formats. CSV numbers are written with 17 significant digits and JSON
// through nlohmann's shortest round-trip formatting, so everything written
// here reads back bit-identical.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "becsplit/evaluation.hpp"
#include "becsplit/legendre.hpp"
#include "becsplit/moment_ocp.hpp"
#include "becsplit/rne.hpp"
#include "becsplit/square_pulse.hpp"

namespace becsplit::io {

using nlohmann::json;
namespace fs = std::filesystem;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);
void write_json(const fs::path& path, const json& j);
json read_json(const fs::path& path);

// Square pulse parameters plus the design context they belong to.
struct SquareRecord {
  SquarePulseParams params;
  int n = 1;
  double delta = 0.1;
  int m = 1;
  double objective = 0.0;
};

json to_json(const SquareRecord& r);
SquareRecord square_record_from_json(const json& j);

// Envelope CSV: header "t,omega", one row per grid point k*dt, plus a final
// row at T repeating the last value so the file plots as a step function.
std::string envelope_csv(const PulseEnvelope& env);
PulseEnvelope parse_envelope_csv(const std::string& text);
void write_envelope_csv(const fs::path& path, const PulseEnvelope& env);
PulseEnvelope read_envelope_csv(const fs::path& path);

// t, |C_0|^2, ..., |C_2N+|^2 for each state of a trajectory.
void write_trajectory_csv(const fs::path& path, double dt, const std::vector<RealState>& states);

// block,row,value
std::string moment_state_csv(const MomentState& m);
MomentState parse_moment_state_csv(const std::string& text);

json to_json(const DesignResult& r);
DesignResult design_result_from_json(const json& j);

void write_residual_csv(const fs::path& path, const std::vector<double>& history);

// Loads square-parameter JSON, design-result JSON or an envelope CSV. The
// label is the file stem.
ControlArtifact load_artifact(const fs::path& path);

json to_json(const EvaluationReport& r);
void write_curve_csv(const fs::path& path, const std::vector<CurvePoint>& curve);
void write_report(const fs::path& dir, const std::vector<EvaluationReport>& rows);

}  // namespace becsplit::io
