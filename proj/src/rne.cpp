#include "becsplit/rne.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace becsplit {

namespace {

const Eigen::Matrix2d kJ = (Eigen::Matrix2d() << 0.0, -1.0, 1.0, 0.0).finished();

void require_dims(const RealState& state, const Truncation& spec) {
  if (state.size() != spec.real_dim()) {
    throw std::invalid_argument("state has dimension " + std::to_string(state.size()) +
                                ", expected " + std::to_string(spec.real_dim()));
  }
}

}  // namespace

Truncation::Truncation(int n_plus_) : n_plus(n_plus_) {
  if (n_plus < 1) throw std::invalid_argument("truncation requires n_plus >= 1");
}

PulseEnvelope::PulseEnvelope(double dt, std::vector<double> values)
    : dt_(dt), values_(std::move(values)) {
  if (!(dt_ > 0.0)) throw std::invalid_argument("envelope dt must be positive");
  if (values_.empty()) throw std::invalid_argument("envelope needs at least one step");
}

Eigen::MatrixXd coupling_pattern(const Truncation& spec) {
  const int n = spec.levels();
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j + 1 < n; ++j) {
    const double c = (j == 0) ? std::sqrt(2.0) : 1.0;
    T(j, j + 1) = c;
    T(j + 1, j) = c;
  }
  return T;
}

Eigen::MatrixXd build_coupling_matrix(double eps, double omega, const Truncation& spec) {
  const int n = spec.levels();
  Eigen::MatrixXd A = (0.5 * eps * omega) * coupling_pattern(spec);
  for (int j = 0; j < n; ++j) A(j, j) = 4.0 * j * j;
  return A;
}

Eigen::MatrixXd real_embed_generator(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("generator input must be square");
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("light-shift matrix must be symmetric");
  }
  const Eigen::Index n = A.rows();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (A(i, j) != 0.0) G.block<2, 2>(2 * i, 2 * j) = A(i, j) * kJ;
    }
  }
  return G;
}

RealState rest_state(const Truncation& spec) {
  RealState x = RealState::Zero(spec.real_dim());
  x(0) = 1.0;
  return x;
}

RealState to_real(const QuantumState& c) {
  RealState x(2 * c.size());
  for (Eigen::Index j = 0; j < c.size(); ++j) {
    x(2 * j) = c(j).real();
    x(2 * j + 1) = c(j).imag();
  }
  return x;
}

QuantumState to_complex(const RealState& x) {
  if (x.size() % 2 != 0) throw std::invalid_argument("real state must have even length");
  QuantumState c(x.size() / 2);
  for (Eigen::Index j = 0; j < c.size(); ++j) c(j) = {x(2 * j), x(2 * j + 1)};
  return c;
}

LevelPropagator::LevelPropagator(const Truncation& spec)
    : spec_(spec), drive_(std::nan("")) {
  const int n = spec.levels();
  diag_.resize(n);
  for (int j = 0; j < n; ++j) diag_(j) = 4.0 * j * j;
  offdiag_pattern_ = Eigen::VectorXd::Ones(n - 1);
  offdiag_pattern_(0) = std::sqrt(2.0);
  work_.resize(n);
  set_drive(0.0);
}

void LevelPropagator::set_drive(double drive) {
  if (drive == drive_) return;
  drive_ = drive;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  const Eigen::VectorXd sub = (0.5 * drive) * offdiag_pattern_;
  es.computeFromTridiagonal(diag_, sub, Eigen::ComputeEigenvectors);
  eigenvalues_ = es.eigenvalues();
  eigenvectors_ = es.eigenvectors();
}

Eigen::MatrixXcd LevelPropagator::unitary(double t) const {
  const Eigen::VectorXcd phase =
      (std::complex<double>(0.0, t) * eigenvalues_.cast<std::complex<double>>()).array().exp();
  return eigenvectors_.cast<std::complex<double>>() * phase.asDiagonal() *
         eigenvectors_.transpose().cast<std::complex<double>>();
}

void LevelPropagator::apply(double t, Eigen::Ref<Eigen::VectorXcd> c) const {
  work_.noalias() = eigenvectors_.transpose().cast<std::complex<double>>() * c;
  for (Eigen::Index j = 0; j < work_.size(); ++j) {
    work_(j) *= std::polar(1.0, t * eigenvalues_(j));
  }
  c.noalias() = eigenvectors_.cast<std::complex<double>>() * work_;
}

RealState step(const RealState& state, double omega, double eps, double dt,
               const Truncation& spec) {
  if (!(dt > 0.0)) throw std::invalid_argument("step requires dt > 0");
  require_dims(state, spec);
  LevelPropagator prop(spec);
  prop.set_drive(eps * omega);
  QuantumState c = to_complex(state);
  prop.apply(dt, c);
  return to_real(c);
}

std::vector<RealState> propagate(const RealState& state0, const PulseEnvelope& envelope,
                                 double eps, const Truncation& spec) {
  require_dims(state0, spec);
  std::vector<RealState> traj;
  traj.reserve(envelope.steps() + 1);
  traj.push_back(state0);
  LevelPropagator prop(spec);
  QuantumState c = to_complex(state0);
  for (double omega : envelope.values()) {
    prop.set_drive(eps * omega);
    prop.apply(envelope.dt(), c);
    traj.push_back(to_real(c));
  }
  return traj;
}

RealState propagate_terminal(const RealState& state0, const PulseEnvelope& envelope,
                             double eps, const Truncation& spec) {
  require_dims(state0, spec);
  LevelPropagator prop(spec);
  QuantumState c = to_complex(state0);
  const auto& v = envelope.values();
  // Runs of equal amplitude collapse into one exponential.
  std::size_t k = 0;
  while (k < v.size()) {
    std::size_t run = 1;
    while (k + run < v.size() && v[k + run] == v[k]) ++run;
    prop.set_drive(eps * v[k]);
    prop.apply(envelope.dt() * static_cast<double>(run), c);
    k += run;
  }
  return to_real(c);
}

Eigen::VectorXd populations(const RealState& state) {
  if (state.size() % 2 != 0) throw std::invalid_argument("real state must have even length");
  const Eigen::Index n = state.size() / 2;
  Eigen::VectorXd p(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    p(j) = state(2 * j) * state(2 * j) + state(2 * j + 1) * state(2 * j + 1);
  }
  return p;
}

}  // namespace becsplit
