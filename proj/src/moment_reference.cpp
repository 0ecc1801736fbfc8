#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "becsplit/moment_kernels.hpp"

namespace becsplit::reference {

Eigen::MatrixXd step_propagator(double omega, double delta, int order, const Truncation& spec,
                                double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step requires dt > 0");
  const Eigen::MatrixXd M = build_moment_generator(omega, delta, order, spec);
  return (dt * M).exp();
}

StepJacobians step_jacobians(const MomentState& m, double omega, double delta,
                             const Truncation& spec, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step requires dt > 0");
  const Eigen::MatrixXd M = build_moment_generator(omega, delta, m.order(), spec);
  const Eigen::MatrixXd dM = moment_generator_derivative(delta, m.order(), spec);
  const Eigen::Index n = M.rows();
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  aug.topLeftCorner(n, n) = dt * M;
  aug.topRightCorner(n, n) = dt * dM;
  aug.bottomRightCorner(n, n) = dt * M;
  const Eigen::MatrixXd E = aug.exp();
  StepJacobians out;
  out.A = E.topLeftCorner(n, n);
  out.B = E.topRightCorner(n, n) * m.values();
  return out;
}

TerminalSensitivity terminal_sensitivity(const MomentState& m0, std::span<const double> controls,
                                         double delta, const Truncation& spec, double dt) {
  const auto steps = static_cast<Eigen::Index>(controls.size());
  std::vector<Eigen::MatrixXd> As;
  std::vector<Eigen::VectorXd> Bs;
  As.reserve(steps);
  Bs.reserve(steps);
  MomentState m = m0;
  for (double u : controls) {
    StepJacobians jac = step_jacobians(m, u, delta, spec, dt);
    m.values() = jac.A * m.values();
    As.push_back(std::move(jac.A));
    Bs.push_back(std::move(jac.B));
  }
  TerminalSensitivity out;
  out.terminal = m.values();
  out.H.resize(m.values().size(), steps);
  Eigen::MatrixXd tail = Eigen::MatrixXd::Identity(m.values().size(), m.values().size());
  for (Eigen::Index k = steps - 1; k >= 0; --k) {
    out.H.col(k) = tail * Bs[k];
    tail = tail * As[k];
  }
  return out;
}

}  // namespace becsplit::reference
