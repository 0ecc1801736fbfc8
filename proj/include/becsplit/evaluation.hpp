#pragma once

// Ensemble performance of a designed control:
//
//   I_e = int_{1-delta}^{1+delta} || |C_f| - |C(T, eps)| ||_2 deps
//
// approximated by Gauss-Legendre quadrature, every node simulated at the
// validation truncation.

#include <string>
#include <variant>
#include <vector>

#include "becsplit/legendre.hpp"
#include "becsplit/rne.hpp"
#include "becsplit/square_pulse.hpp"

namespace becsplit {

inline constexpr int kValidationNPlus = 24;

struct ControlArtifact {
  std::variant<SquarePulseParams, PulseEnvelope> payload;
  std::string label;

  bool is_square() const { return std::holds_alternative<SquarePulseParams>(payload); }
};

// Terminal error of the artifact at a single eps. Square pulses use the exact
// three-exponential product, envelopes their own dt grid.
double artifact_error(const ControlArtifact& artifact, double eps, const TargetSpec& target);

double performance_index(const ControlArtifact& artifact, double delta, const TargetSpec& target,
                         const QuadratureRule& rule);

// Same, with the default 64-node rule.
double performance_index(const ControlArtifact& artifact, double delta, const TargetSpec& target);

struct CurvePoint {
  double eps = 0.0;
  double error = 0.0;
  double fidelity = 0.0;  // 1 - error
};

// Uniform eps grid over [1 - delta, 1 + delta], endpoints included.
std::vector<CurvePoint> fidelity_curve(const ControlArtifact& artifact, double delta,
                                       const TargetSpec& target, int n_points);

struct EvaluationReport {
  std::string label;
  double index_value = 0.0;
  std::vector<CurvePoint> curve;
  int n_plus_val = kValidationNPlus;
};

std::vector<EvaluationReport> compare_report(const std::vector<ControlArtifact>& artifacts,
                                             double delta, const TargetSpec& target,
                                             int curve_points = 201);

}  // namespace becsplit
