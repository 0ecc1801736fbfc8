#include "becsplit/evaluation.hpp"

#include <stdexcept>

namespace becsplit {

double artifact_error(const ControlArtifact& artifact, double eps, const TargetSpec& target) {
  if (const auto* sq = std::get_if<SquarePulseParams>(&artifact.payload)) {
    return terminal_error(*sq, eps, target);
  }
  const auto& env = std::get<PulseEnvelope>(artifact.payload);
  const Truncation spec = target.truncation();
  return terminal_error(propagate_terminal(rest_state(spec), env, eps, spec), target.n);
}

double performance_index(const ControlArtifact& artifact, double delta, const TargetSpec& target,
                         const QuadratureRule& rule) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  const EnsembleParameterMap map(delta);
  const auto count = static_cast<int>(rule.nodes.size());
  std::vector<double> errors(count);
#pragma omp parallel for schedule(dynamic)
  for (int j = 0; j < count; ++j) {
    errors[j] = artifact_error(artifact, map.to_eps(rule.nodes(j)), target);
  }
  double total = 0.0;
  for (int j = 0; j < count; ++j) total += rule.weights(j) * errors[j];
  return delta * total;
}

double performance_index(const ControlArtifact& artifact, double delta, const TargetSpec& target) {
  return performance_index(artifact, delta, target, gauss_legendre(64));
}

std::vector<CurvePoint> fidelity_curve(const ControlArtifact& artifact, double delta,
                                       const TargetSpec& target, int n_points) {
  if (n_points < 2) throw std::invalid_argument("fidelity curve needs at least 2 points");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  std::vector<CurvePoint> curve(n_points);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n_points; ++i) {
    const double eps = 1.0 - delta + 2.0 * delta * i / (n_points - 1);
    const double err = artifact_error(artifact, eps, target);
    curve[i] = {eps, err, 1.0 - err};
  }
  curve.back().eps = 1.0 + delta;
  return curve;
}

std::vector<EvaluationReport> compare_report(const std::vector<ControlArtifact>& artifacts,
                                             double delta, const TargetSpec& target,
                                             int curve_points) {
  if (artifacts.empty()) throw std::invalid_argument("compare_report needs at least one artifact");
  const QuadratureRule rule = gauss_legendre(64);
  std::vector<EvaluationReport> rows;
  rows.reserve(artifacts.size());
  for (const auto& a : artifacts) {
    rows.push_back({a.label, performance_index(a, delta, target, rule),
                    fidelity_curve(a, delta, target, curve_points), target.n_plus});
  }
  return rows;
}

}  // namespace becsplit
