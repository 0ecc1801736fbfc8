#include "becsplit/moment_kernels.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

namespace becsplit {

namespace {

using cd = std::complex<double>;

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

Eigen::VectorXcd block_to_complex(const Eigen::Ref<const Eigen::VectorXd>& x) {
  Eigen::VectorXcd c(x.size() / 2);
  for (Eigen::Index a = 0; a < c.size(); ++a) c(a) = {x(2 * a), x(2 * a + 1)};
  return c;
}

void complex_to_block(const Eigen::VectorXcd& c, Eigen::Ref<Eigen::VectorXd> x) {
  for (Eigen::Index a = 0; a < c.size(); ++a) {
    x(2 * a) = c(a).real();
    x(2 * a + 1) = c(a).imag();
  }
}

// Real 2L x 2L matrix of the complex L x L map acting on interleaved states.
Eigen::MatrixXd complex_to_real_matrix(const Eigen::MatrixXcd& U) {
  const Eigen::Index L = U.rows();
  Eigen::MatrixXd R(2 * L, 2 * L);
  for (Eigen::Index a = 0; a < L; ++a) {
    for (Eigen::Index b = 0; b < L; ++b) {
      const cd u = U(a, b);
      R(2 * a, 2 * b) = u.real();
      R(2 * a, 2 * b + 1) = -u.imag();
      R(2 * a + 1, 2 * b) = u.imag();
      R(2 * a + 1, 2 * b + 1) = u.real();
    }
  }
  return R;
}

// [d/domega exp(i t A(eps, omega))] c, given the eigendecomposition held by
// prop. Daleckii-Krein form with the divided differences of exp(i t x)
// written through sinc so close eigenvalues stay accurate.
Eigen::VectorXcd derivative_apply(const LevelPropagator& prop, const Eigen::MatrixXd& pattern,
                                  double eps, double t, const Eigen::VectorXcd& c) {
  const Eigen::MatrixXd& Q = prop.eigenvectors();
  const Eigen::VectorXd& lam = prop.eigenvalues();
  const Eigen::Index L = lam.size();
  const Eigen::MatrixXd K = Q.transpose() * (pattern * Q);
  const Eigen::VectorXcd y = Q.transpose().cast<cd>() * c;
  Eigen::VectorXcd g = Eigen::VectorXcd::Zero(L);
  for (Eigen::Index a = 0; a < L; ++a) {
    cd acc = 0.0;
    for (Eigen::Index b = 0; b < L; ++b) {
      const double mean = 0.5 * (lam(a) + lam(b));
      const double half_gap = 0.5 * t * (lam(a) - lam(b));
      const cd f = cd(0.0, t) * std::polar(1.0, t * mean) * sinc(half_gap);
      acc += f * K(a, b) * y(b);
    }
    g(a) = 0.5 * eps * acc;
  }
  return Q.cast<cd>() * g;
}

void require_state(const MomentNodeBasis& basis, const Eigen::VectorXd& v) {
  if (v.size() != basis.state_dim()) {
    throw std::invalid_argument("moment state has dimension " + std::to_string(v.size()) +
                                ", expected " + std::to_string(basis.state_dim()));
  }
}

}  // namespace

MomentNodeBasis::MomentNodeBasis(int order, double delta, const Truncation& spec)
    : order_(order), delta_(delta), spec_(spec) {
  if (order < 1) throw std::invalid_argument("moment order must be >= 1");
  if (!(delta >= 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in [0, 1)");
  if (state_dim() > kMaxMomentGeneratorDim) throw std::length_error("moment state dimension too large");
  if (order == 1) {
    nodes_ = Eigen::VectorXd::Zero(1);
    basis_ = Eigen::MatrixXd::Identity(1, 1);
    return;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(coupling_tridiagonal(order));
  nodes_ = es.eigenvalues();
  basis_ = es.eigenvectors();
  // Fix signs so V(0, j) > 0; then V(k, j) = sqrt(w_j) P_k(mu_j).
  for (int j = 0; j < order; ++j) {
    if (basis_(0, j) < 0.0) basis_.col(j) *= -1.0;
  }
}

Eigen::VectorXd MomentNodeBasis::to_nodes(const Eigen::VectorXd& moments) const {
  require_state(*this, moments);
  Eigen::VectorXd z(state_dim());
  Eigen::Map<const Eigen::MatrixXd> M(moments.data(), block_dim(), order_);
  Eigen::Map<Eigen::MatrixXd>(z.data(), block_dim(), order_).noalias() = M * basis_;
  return z;
}

Eigen::VectorXd MomentNodeBasis::from_nodes(const Eigen::VectorXd& node_states) const {
  require_state(*this, node_states);
  Eigen::VectorXd m(state_dim());
  Eigen::Map<const Eigen::MatrixXd> Z(node_states.data(), block_dim(), order_);
  Eigen::Map<Eigen::MatrixXd>(m.data(), block_dim(), order_).noalias() = Z * basis_.transpose();
  return m;
}

Eigen::MatrixXd MomentNodeBasis::from_nodes(const Eigen::MatrixXd& node_columns) const {
  if (node_columns.rows() != state_dim()) throw std::invalid_argument("node matrix has wrong row count");
  Eigen::MatrixXd out(node_columns.rows(), node_columns.cols());
  for (Eigen::Index col = 0; col < node_columns.cols(); ++col) {
    Eigen::Map<const Eigen::MatrixXd> Z(node_columns.col(col).data(), block_dim(), order_);
    Eigen::Map<Eigen::MatrixXd>(out.col(col).data(), block_dim(), order_).noalias() =
        Z * basis_.transpose();
  }
  return out;
}

MomentState moment_step(const MomentNodeBasis& basis, const MomentState& m, double omega, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step requires dt > 0");
  const double controls[1] = {omega};
  return moment_rollout(basis, m, controls, dt);
}

StepJacobians moment_step_jacobians(const MomentNodeBasis& basis, const MomentState& m,
                                    double omega, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step requires dt > 0");
  const Eigen::VectorXd z = basis.to_nodes(m.values());
  const int D = basis.block_dim();
  const Eigen::Index n = basis.state_dim();
  const Eigen::MatrixXd pattern = coupling_pattern(basis.truncation());

  Eigen::MatrixXd blockdiag = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd bz(n);
  LevelPropagator prop(basis.truncation());
  for (int j = 0; j < basis.order(); ++j) {
    const double eps = basis.node_eps(j);
    prop.set_drive(eps * omega);
    blockdiag.block(j * D, j * D, D, D) = complex_to_real_matrix(prop.unitary(dt));
    const Eigen::VectorXcd c = block_to_complex(z.segment(j * D, D));
    complex_to_block(derivative_apply(prop, pattern, eps, dt, c), bz.segment(j * D, D));
  }
  const Eigen::MatrixXd P = Eigen::kroneckerProduct(basis.basis(), Eigen::MatrixXd::Identity(D, D));
  StepJacobians out;
  out.A = P * blockdiag * P.transpose();
  out.B = basis.from_nodes(bz);
  return out;
}

Eigen::VectorXd moment_rollout_nodes(const MomentNodeBasis& basis, const Eigen::VectorXd& z0,
                                     std::span<const double> controls, double dt) {
  require_state(basis, z0);
  const int D = basis.block_dim();
  Eigen::VectorXd zT(z0.size());
  const int order = basis.order();
#pragma omp parallel for schedule(static)
  for (int j = 0; j < order; ++j) {
    LevelPropagator prop(basis.truncation());
    const double eps = basis.node_eps(j);
    Eigen::VectorXcd c = block_to_complex(z0.segment(j * D, D));
    for (double u : controls) {
      prop.set_drive(eps * u);
      prop.apply(dt, c);
    }
    complex_to_block(c, zT.segment(j * D, D));
  }
  return zT;
}

MomentState moment_rollout(const MomentNodeBasis& basis, const MomentState& m0,
                           std::span<const double> controls, double dt) {
  const Eigen::VectorXd zT = moment_rollout_nodes(basis, basis.to_nodes(m0.values()), controls, dt);
  return MomentState(m0.order(), m0.block_dim(), basis.from_nodes(zT));
}

TerminalSensitivity terminal_sensitivity(const MomentNodeBasis& basis, const MomentState& m0,
                                         std::span<const double> controls, double dt) {
  const Eigen::VectorXd z0 = basis.to_nodes(m0.values());
  const int D = basis.block_dim();
  const int L = basis.truncation().levels();
  const auto steps = static_cast<Eigen::Index>(controls.size());
  const Eigen::MatrixXd pattern = coupling_pattern(basis.truncation());

  TerminalSensitivity out;
  out.terminal.resize(basis.state_dim());
  out.H.resize(basis.state_dim(), steps);
  const int order = basis.order();

  // Column k of H at node j is U_T U_k^* B_k with U_k the propagator
  // through step k.
#pragma omp parallel for schedule(static)
  for (int j = 0; j < order; ++j) {
    LevelPropagator prop(basis.truncation());
    const double eps = basis.node_eps(j);
    Eigen::VectorXcd c = block_to_complex(z0.segment(j * D, D));
    Eigen::MatrixXcd cumulative = Eigen::MatrixXcd::Identity(L, L);
    Eigen::MatrixXcd pulled(L, steps);
    Eigen::VectorXcd phase(L);
    for (Eigen::Index k = 0; k < steps; ++k) {
      prop.set_drive(eps * controls[k]);
      const Eigen::MatrixXcd Q = prop.eigenvectors().cast<cd>();
      const Eigen::VectorXcd b = derivative_apply(prop, pattern, eps, dt, c);
      for (int a = 0; a < L; ++a) phase(a) = std::polar(1.0, dt * prop.eigenvalues()(a));
      const Eigen::VectorXcd y = Q.transpose() * c;
      c.noalias() = Q * phase.cwiseProduct(y);
      const Eigen::MatrixXcd rotated = phase.asDiagonal() * (Q.transpose() * cumulative);
      cumulative.noalias() = Q * rotated;
      pulled.col(k).noalias() = cumulative.adjoint() * b;
    }
    const Eigen::MatrixXcd cols = cumulative * pulled;
    for (Eigen::Index k = 0; k < steps; ++k) {
      for (int a = 0; a < L; ++a) {
        out.H(j * D + 2 * a, k) = cols(a, k).real();
        out.H(j * D + 2 * a + 1, k) = cols(a, k).imag();
      }
    }
    complex_to_block(c, out.terminal.segment(j * D, D));
  }
  return out;
}

}  // namespace becsplit
