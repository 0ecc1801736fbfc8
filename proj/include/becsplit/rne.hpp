#pragma once

// Truncated Raman-Nath model: momentum levels C0, C2+, ..., C2N+ driven by a
// light-shift amplitude Omega(t) scaled by the ensemble factor eps.
//
// Units: omega_r = 1. Times are omega_r * t, amplitudes are Omega / omega_r.
//
// Real embedding: a complex state (C0, C2, ...) is stored interleaved as
// (Re C0, Im C0, Re C2, Im C2, ...). The real generator is G = A (x) J with
// J = [[0, -1], [1, 0]], which corresponds to dC/dt = +i A C. This is the
// complex conjugate of the -i A C convention; populations are identical.

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace becsplit {

using RealState = Eigen::VectorXd;
using QuantumState = Eigen::VectorXcd;

struct Truncation {
  int n_plus = 9;

  explicit Truncation(int n_plus_ = 9);

  int levels() const { return n_plus + 1; }
  int real_dim() const { return 2 * (n_plus + 1); }
};

// Piecewise-constant control on a uniform grid. values[k] holds on
// [k*dt, (k+1)*dt).
class PulseEnvelope {
 public:
  PulseEnvelope(double dt, std::vector<double> values);

  double dt() const { return dt_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t steps() const { return values_.size(); }
  double duration() const { return dt_ * static_cast<double>(values_.size()); }

  // Samples f at the left end of each interval.
  template <typename F>
  static PulseEnvelope sample(double dt, std::size_t steps, F&& f) {
    std::vector<double> v(steps);
    for (std::size_t k = 0; k < steps; ++k) v[k] = f(static_cast<double>(k) * dt);
    return PulseEnvelope(dt, std::move(v));
  }

 private:
  double dt_;
  std::vector<double> values_;
};

// Tridiagonal coupling pattern T of the light-shift matrix: T01 = sqrt(2),
// every other neighbour coupling 1.
Eigen::MatrixXd coupling_pattern(const Truncation& spec);

// A(eps, omega) = diag(0, 4, 16, ..., (2N+)^2) + (eps * omega / 2) * T.
Eigen::MatrixXd build_coupling_matrix(double eps, double omega, const Truncation& spec);

// G = A (x) J. Throws std::invalid_argument when A is not symmetric.
Eigen::MatrixXd real_embed_generator(const Eigen::MatrixXd& A);

RealState rest_state(const Truncation& spec);
RealState to_real(const QuantumState& c);
QuantumState to_complex(const RealState& x);

// Exact one-step map exp(dt * G(eps, omega)) applied to state.
RealState step(const RealState& state, double omega, double eps, double dt,
               const Truncation& spec);

// trajectory[0] = state0, trajectory[k+1] = step(trajectory[k], values[k], ...).
std::vector<RealState> propagate(const RealState& state0, const PulseEnvelope& envelope,
                                 double eps, const Truncation& spec);

// Same map as propagate() without keeping the intermediate states.
RealState propagate_terminal(const RealState& state0, const PulseEnvelope& envelope,
                             double eps, const Truncation& spec);

// |C_j|^2 for each level.
Eigen::VectorXd populations(const RealState& state);

// Unitary propagator exp(+i t A) for a symmetric tridiagonal A built from
// the level structure. Keeps the eigendecomposition so repeated applications
// with the same (eps * omega) are cheap.
class LevelPropagator {
 public:
  explicit LevelPropagator(const Truncation& spec);

  // Diagonalizes A(1, drive) where drive = eps * omega.
  void set_drive(double drive);
  double drive() const { return drive_; }

  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }

  // exp(+i t A) as a dense complex matrix.
  Eigen::MatrixXcd unitary(double t) const;
  // c <- exp(+i t A) c
  void apply(double t, Eigen::Ref<Eigen::VectorXcd> c) const;

 private:
  Truncation spec_;
  double drive_;
  Eigen::VectorXd diag_;
  Eigen::VectorXd offdiag_pattern_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  mutable Eigen::VectorXcd work_;
};

}  // namespace becsplit
