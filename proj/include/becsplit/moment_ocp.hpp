#pragma once

// Iterative moment-space pulse design. Each outer iteration rolls the
// moment system out under the current controls U, linearizes every step
// exactly, stacks the terminal sensitivities into H, and solves
//
//   min_dU  dU' (H'H + lambda I) dU + f' H dU
//   s.t.    omega_min <= U + dU <= omega_max
//           slew_min dt <= (U + dU)_{k+1} - (U + dU)_k <= slew_max dt
//
// where f is the masked terminal moment state. Accepted steps shrink
// lambda, rejected steps (residual increase) grow it.

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "becsplit/legendre.hpp"
#include "becsplit/moment_kernels.hpp"
#include "becsplit/qp.hpp"
#include "becsplit/rne.hpp"

namespace becsplit {

struct InitialGuess {
  // U0(t) = offset + amplitude * sin(frequency * t) unless values is set.
  double offset = 2.5;
  double amplitude = 1.0;
  double frequency = 1.0;
  std::optional<std::vector<double>> values;
};

struct OcpConfig {
  int n = 1;
  double delta = 0.1;
  int order = 20;
  int n_plus = 9;
  double horizon = 3.0;
  double dt = 0.001;
  double omega_min = 0.0;
  double omega_max = 100.0;
  double slew_min = -500.0;
  double slew_max = 500.0;
  double lambda = 1e-2;
  double lambda_max = 1e8;
  // Defaults to 0.02 * ||m(0)|| when unset.
  std::optional<double> tolerance;
  int max_iters = 200;
  InitialGuess initial_guess;
  // Controls are held for `coarsen` consecutive grid steps.
  int coarsen = 1;
  double qp_tol = 1e-4;  // KKT tolerance relative to |H'f|_inf
  int qp_max_iters = 20000;

  void validate() const;  // throws std::invalid_argument naming the violated invariant
  int steps() const;
  int control_count() const { return steps() / coarsen; }
  Truncation truncation() const { return Truncation(n_plus); }
  double effective_tolerance() const;
};

// Zeros on the two real coordinates of level n in every moment block.
class TargetMask {
 public:
  TargetMask(int n, int order, const Truncation& spec);
  const Eigen::VectorXd& values() const { return mask_; }

 private:
  Eigen::VectorXd mask_;
};

struct TerminalResidual {
  Eigen::VectorXd f;
  double norm = 0.0;
};

struct DesignResult {
  PulseEnvelope envelope;
  std::vector<double> residual_history;
  double terminal_residual = 0.0;
  bool converged = false;
  int iterations = 0;
  double final_lambda = 0.0;
};

MomentState step_map(const MomentState& m, double omega, const OcpConfig& cfg);

// A_i = exp(dt M(omega)), B_i = [d/domega exp(dt M(omega))] m, both exact
// (block-augmented exponential of the assembled generator).
StepJacobians step_jacobians(const MomentState& m, double omega, const OcpConfig& cfg);

// Column k = A_K ... A_{k+1} B_k, one reverse sweep.
Eigen::MatrixXd assemble_H(const std::vector<Eigen::MatrixXd>& A_list,
                           const std::vector<Eigen::VectorXd>& B_list);

TerminalResidual terminal_residual(const MomentState& m_T, const TargetMask& mask);

struct QpStep {
  Eigen::VectorXd delta_u;
  QpSolution solution;
};

// Solves the linearized subproblem around U. Requires U feasible (so that
// dU = 0 is feasible); throws std::logic_error otherwise. The objective is
// scaled to unit gradient before solving: solution.y is in the original
// units, solution.kkt_residual is relative to |H'f|_inf.
QpStep qp_subproblem(const Eigen::MatrixXd& H, const Eigen::VectorXd& f,
                     const std::vector<double>& U, const OcpConfig& cfg, double lambda,
                     const QpSolution* warm = nullptr);

// True when U satisfies amplitude and slew bounds (up to slack).
bool is_feasible(const std::vector<double>& U, const OcpConfig& cfg, double slack = 1e-12);

// Moves U onto the feasible set: clip to the amplitude box, then a forward
// pass limits each increment to the slew window.
std::vector<double> make_feasible(std::vector<double> U, const OcpConfig& cfg);

std::vector<double> initial_controls(const OcpConfig& cfg);

using DesignProgress = std::function<void(int iteration, double residual, double lambda)>;

DesignResult design_pulse(const OcpConfig& cfg, const DesignProgress& progress = {});

}  // namespace becsplit
