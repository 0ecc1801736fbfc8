#pragma once

// Propagation and sensitivity kernels for the Legendre moment system.
//
// The moment generator is
//
//   M(omega) = I (x) D (x) J + (omega / 2) (I + delta C) (x) T (x) J,
//
// with C the Jacobi matrix of the normalized Legendre recurrence. Writing
// C = V diag(mu) V' (mu are the N-point Gauss-Legendre nodes) gives
//
//   (V' (x) I) M(omega) (V (x) I) = blockdiag_j G(1 + delta mu_j, omega),
//
// so the moment dynamics decouple exactly into N level systems. The kernels
// below work in these node coordinates and parallelize over nodes. The
// reference:: namespace keeps a dense implementation written directly from
// the Kronecker form; tests hold the two against each other.

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "becsplit/legendre.hpp"
#include "becsplit/rne.hpp"

namespace becsplit {

class MomentNodeBasis {
 public:
  MomentNodeBasis(int order, double delta, const Truncation& spec);

  int order() const { return order_; }
  int block_dim() const { return spec_.real_dim(); }
  Eigen::Index state_dim() const { return static_cast<Eigen::Index>(order_) * block_dim(); }
  double delta() const { return delta_; }
  const Truncation& truncation() const { return spec_; }

  // Gauss nodes mu_j and orthogonal V with C = V diag(mu) V'.
  const Eigen::VectorXd& nodes() const { return nodes_; }
  const Eigen::MatrixXd& basis() const { return basis_; }
  double node_eps(int j) const { return 1.0 + delta_ * nodes_(j); }

  // Stacked moments -> stacked node states (block j is node j), and back.
  Eigen::VectorXd to_nodes(const Eigen::VectorXd& moments) const;
  Eigen::VectorXd from_nodes(const Eigen::VectorXd& node_states) const;
  Eigen::MatrixXd from_nodes(const Eigen::MatrixXd& node_columns) const;

 private:
  int order_;
  double delta_;
  Truncation spec_;
  Eigen::VectorXd nodes_;
  Eigen::MatrixXd basis_;
};

struct StepJacobians {
  Eigen::MatrixXd A;  // d step / d m
  Eigen::VectorXd B;  // d step / d omega
};

// Terminal state and H = [dm(T)/dU_1 | ... | dm(T)/dU_K], both expressed in
// node coordinates. H'H and H'f are the same in either coordinate system.
struct TerminalSensitivity {
  Eigen::VectorXd terminal;
  Eigen::MatrixXd H;
};

MomentState moment_step(const MomentNodeBasis& basis, const MomentState& m, double omega, double dt);

StepJacobians moment_step_jacobians(const MomentNodeBasis& basis, const MomentState& m,
                                    double omega, double dt);

// Terminal node-coordinate state after applying controls[k] on consecutive
// steps of length dt.
Eigen::VectorXd moment_rollout_nodes(const MomentNodeBasis& basis, const Eigen::VectorXd& z0,
                                     std::span<const double> controls, double dt);

MomentState moment_rollout(const MomentNodeBasis& basis, const MomentState& m0,
                           std::span<const double> controls, double dt);

TerminalSensitivity terminal_sensitivity(const MomentNodeBasis& basis, const MomentState& m0,
                                         std::span<const double> controls, double dt);

namespace reference {

// exp(dt M(omega)) by Pade scaling and squaring on the assembled generator.
Eigen::MatrixXd step_propagator(double omega, double delta, int order, const Truncation& spec,
                                double dt);

// A = exp(dt M), B = [d/domega exp(dt M)] m from the top-right block of
// exp(dt [[M, dM], [0, M]]).
StepJacobians step_jacobians(const MomentState& m, double omega, double delta,
                             const Truncation& spec, double dt);

// Moment-coordinate terminal state and H, one dense step at a time.
TerminalSensitivity terminal_sensitivity(const MomentState& m0, std::span<const double> controls,
                                         double delta, const Truncation& spec, double dt);

}  // namespace reference

}  // namespace becsplit
