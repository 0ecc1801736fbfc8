#include <doctest.h>

#include <cmath>
#include <random>

#include "becsplit/moment_kernels.hpp"
#include "oracles.hpp"

using namespace becsplit;

namespace {

MomentState random_moments(int order, const Truncation& spec, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  MomentState m(order, spec.real_dim());
  for (auto& v : m.values()) v = g(rng);
  return m;
}

std::vector<double> random_controls(int steps, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 30.0);
  std::vector<double> v(steps);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_CASE("node basis diagonalizes the recurrence matrix") {
  const MomentNodeBasis b(12, 0.1, Truncation(3));
  const Eigen::MatrixXd& V = b.basis();
  CHECK((V.transpose() * V - Eigen::MatrixXd::Identity(12, 12)).norm() < 1e-13);
  CHECK((V * b.nodes().asDiagonal() * V.transpose() - coupling_tridiagonal(12)).norm() < 1e-13);
  const oracle::Rule r = oracle::golub_welsch(12);
  for (int j = 0; j < 12; ++j) {
    CHECK(b.nodes()(j) == doctest::Approx(r.x(j)).epsilon(1e-12));
    for (int k = 0; k < 12; ++k) {
      CHECK(V(k, j) == doctest::Approx(std::sqrt(r.w(j)) * oracle::legendre_normalized(k, r.x(j))).epsilon(1e-10));
    }
  }
  CHECK(b.node_eps(0) == doctest::Approx(1.0 + 0.1 * b.nodes()(0)));
}

TEST_CASE("node transform round trip") {
  const Truncation spec(4);
  const MomentNodeBasis b(7, 0.2, spec);
  const MomentState m = random_moments(7, spec, 1);
  CHECK((b.from_nodes(b.to_nodes(m.values())) - m.values()).norm() < 1e-13);
  CHECK(b.to_nodes(m.values()).norm() == doctest::Approx(m.values().norm()));
  CHECK_THROWS_AS(b.to_nodes(Eigen::VectorXd::Zero(5)), std::invalid_argument);
}

TEST_CASE("fast step matches the dense exponential") {
  const Truncation spec(5);
  for (int order : {1, 2, 8}) {
    const MomentNodeBasis b(order, 0.3, spec);
    const MomentState m = random_moments(order, spec, 2);
    const MomentState fast = moment_step(b, m, 17.0, 0.01);
    const Eigen::VectorXd ref = reference::step_propagator(17.0, 0.3, order, spec, 0.01) * m.values();
    CHECK((fast.values() - ref).norm() < 1e-12 * ref.norm());
  }
}

TEST_CASE("step Jacobians: fast, block-augmented and finite differences agree") {
  const Truncation spec(4);
  const int order = 6;
  const double delta = 0.2, dt = 0.01, omega = 23.0;
  const MomentNodeBasis b(order, delta, spec);
  const MomentState m = random_moments(order, spec, 3);
  const StepJacobians fast = moment_step_jacobians(b, m, omega, dt);
  const StepJacobians ref = reference::step_jacobians(m, omega, delta, spec, dt);
  CHECK((fast.A - ref.A).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((fast.B - ref.B).norm() < 1e-11 * ref.B.norm());

  const Eigen::VectorXd fd = oracle::central_difference(
      [&](double u) { return Eigen::VectorXd(reference::step_propagator(u, delta, order, spec, dt) * m.values()); },
      omega, 1e-4);
  CHECK((ref.B - fd).norm() <= 1e-5 * ref.B.norm());

  Eigen::MatrixXd Afd(m.values().size(), m.values().size());
  for (Eigen::Index i = 0; i < Afd.cols(); ++i) {
    MomentState plus = m, minus = m;
    plus.values()(i) += 1e-5;
    minus.values()(i) -= 1e-5;
    Afd.col(i) = (moment_step(b, plus, omega, dt).values() - moment_step(b, minus, omega, dt).values()) / 2e-5;
  }
  CHECK((Afd - ref.A).norm() <= 1e-5 * ref.A.norm());
}

TEST_CASE("rollout conserves the moment norm") {
  const Truncation spec(9);
  const MomentNodeBasis b(20, 0.1, spec);
  const MomentState m0 = MomentState::rest(20, spec);
  const MomentState mT = moment_rollout(b, m0, random_controls(3000, 4), 0.001);
  CHECK(std::abs(mT.values().norm() - m0.values().norm()) < 1e-9);
}

TEST_CASE("terminal sensitivity agrees with the dense reverse sweep") {
  const Truncation spec(3);
  const int order = 5;
  const double delta = 0.15, dt = 0.02;
  const MomentNodeBasis b(order, delta, spec);
  const MomentState m0 = MomentState::rest(order, spec);
  const std::vector<double> u = random_controls(25, 5);
  const TerminalSensitivity fast = terminal_sensitivity(b, m0, u, dt);
  const TerminalSensitivity ref = reference::terminal_sensitivity(m0, u, delta, spec, dt);
  CHECK((b.from_nodes(fast.terminal) - ref.terminal).norm() < 1e-11);
  CHECK((b.from_nodes(fast.H) - ref.H).cwiseAbs().maxCoeff() < 1e-10);

  // one column against a finite difference of the full rollout
  const int k = 11;
  const Eigen::VectorXd fd = oracle::central_difference(
      [&](double x) {
        std::vector<double> v = u;
        v[k] = x;
        return Eigen::VectorXd(moment_rollout(b, m0, v, dt).values());
      },
      u[k], 1e-4);
  CHECK((ref.H.col(k) - fd).norm() <= 1e-5 * fd.norm());
}

TEST_CASE("moment propagation reproduces the ensemble") {
  const Truncation spec(9);
  const int order = 20;
  const double delta = 0.1;
  const MomentNodeBasis b(order, delta, spec);
  const std::vector<double> u(1000, 3.0);
  const MomentState mT = moment_rollout(b, MomentState::rest(order, spec), u, 0.001);
  for (double x : {-1.0, -0.4, 0.3, 1.0}) {
    const Eigen::VectorXcd direct = oracle::rk4(u, 0.001, 1.0 + delta * x, 9, 10);
    CHECK((to_complex(ensemble_from_moments(mT, x)) - direct).norm() < 1e-6);
  }
}
