#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "becsplit/moment_ocp.hpp"

using namespace becsplit;

namespace {

OcpConfig small_config() {
  OcpConfig c;
  c.order = 4;
  c.n_plus = 4;
  c.horizon = 0.5;
  c.dt = 0.005;
  c.lambda = 1e-8;
  c.max_iters = 15;
  c.tolerance = 1e-6;
  return c;
}

}  // namespace

TEST_CASE("config validation names the violated invariant") {
  OcpConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.steps() == 3000);
  CHECK(c.effective_tolerance() == doctest::Approx(0.02 * std::sqrt(2.0)));
  c.n = 10;
  CHECK_THROWS_WITH(c.validate(), doctest::Contains("n_plus"));
  c = OcpConfig{};
  c.dt = 0.0007;
  CHECK_THROWS_WITH(c.validate(), doctest::Contains("divide"));
  c = OcpConfig{};
  c.slew_min = 1.0;
  CHECK_THROWS_WITH(c.validate(), doctest::Contains("slew"));
  c = OcpConfig{};
  c.omega_min = 200.0;
  CHECK_THROWS_WITH(c.validate(), doctest::Contains("omega_min"));
  c = OcpConfig{};
  c.initial_guess.values = std::vector<double>(10, 1.0);
  CHECK_THROWS_WITH(c.validate(), doctest::Contains("initial guess"));
}

TEST_CASE("target mask zeros level n in every block") {
  const Truncation spec(3);
  const TargetMask mask(2, 3, spec);
  const Eigen::VectorXd& v = mask.values();
  REQUIRE(v.size() == 24);
  for (int k = 0; k < 3; ++k) {
    for (int r = 0; r < 8; ++r) CHECK(v(k * 8 + r) == ((r == 4 || r == 5) ? 0.0 : 1.0));
  }
  MomentState m(3, 8, Eigen::VectorXd::Ones(24));
  const TerminalResidual res = terminal_residual(m, mask);
  CHECK(res.norm == doctest::Approx(std::sqrt(18.0)));
}

TEST_CASE("assembled H matches the fast sensitivity") {
  OcpConfig c = small_config();
  c.horizon = 0.1;
  c.dt = 0.01;
  const Truncation spec = c.truncation();
  const MomentNodeBasis basis(c.order, c.delta, spec);
  const std::vector<double> U = initial_controls(c);
  std::vector<Eigen::MatrixXd> As;
  std::vector<Eigen::VectorXd> Bs;
  MomentState m = MomentState::rest(c.order, spec);
  for (double u : U) {
    StepJacobians j = step_jacobians(m, u, c);
    CHECK((step_map(m, u, c).values() - j.A * m.values()).norm() < 1e-12);
    m.values() = j.A * m.values();
    As.push_back(j.A);
    Bs.push_back(j.B);
  }
  const Eigen::MatrixXd H = assemble_H(As, Bs);
  const TerminalSensitivity fast = terminal_sensitivity(basis, MomentState::rest(c.order, spec), U, c.dt);
  CHECK((basis.from_nodes(fast.H) - H).cwiseAbs().maxCoeff() < 1e-10);
  CHECK_THROWS(assemble_H({}, {}));
}

TEST_CASE("unconstrained subproblem equals the dense normal-equation step") {
  OcpConfig c = small_config();
  c.horizon = 0.05;
  c.dt = 0.005;  // 10 steps
  c.omega_min = -1e6;
  c.omega_max = 1e6;
  c.slew_min = -1e9;
  c.slew_max = 1e9;
  const double lambda = 1e-3;
  std::mt19937 rng(3);
  std::normal_distribution<double> g;
  Eigen::MatrixXd H(12, 10);
  for (auto& v : H.reshaped()) v = g(rng);
  Eigen::VectorXd f(12);
  for (auto& v : f) v = g(rng);
  const std::vector<double> U(10, 2.0);
  const QpStep step = qp_subproblem(H, f, U, c, lambda);
  Eigen::MatrixXd K = H.transpose() * H + lambda * Eigen::MatrixXd::Identity(10, 10);
  const Eigen::VectorXd expect = -0.5 * K.ldlt().solve(H.transpose() * f);
  CHECK((step.delta_u - expect).cwiseAbs().maxCoeff() < 1e-8);

  // A gradient far below qp_tol still gives the proportional step.
  const QpStep tiny = qp_subproblem(H, 1e-9 * f, U, c, lambda);
  CHECK((tiny.delta_u - 1e-9 * expect).cwiseAbs().maxCoeff() < 1e-8 * 1e-9 * (1.0 + expect.norm()));
}

TEST_CASE("active amplitude bound is met exactly") {
  OcpConfig c = small_config();
  c.horizon = 0.05;
  c.dt = 0.005;
  c.slew_min = -1e9;
  c.slew_max = 1e9;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(10, 10);
  H.diagonal().setOnes();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(10);
  f(3) = -400.0;  // pushes U_3 far above omega_max
  std::vector<double> U(10, 50.0);
  const QpStep step = qp_subproblem(H, f, U, c, 1e-3);
  CHECK(U[3] + step.delta_u(3) == doctest::Approx(c.omega_max).epsilon(1e-10));
  CHECK(step.solution.y(3) >= 0.0);
  CHECK(step.solution.kkt_residual <= 1e-6);
  U[2] = 150.0;
  CHECK_THROWS_AS(qp_subproblem(H, f, U, c, 1e-3), std::logic_error);
}

TEST_CASE("feasibility repair") {
  OcpConfig c;
  std::vector<double> U{-5.0, 120.0, 0.2, 50.0, 49.0};
  CHECK_FALSE(is_feasible(U, c));
  const std::vector<double> fixed = make_feasible(U, c);
  CHECK(is_feasible(fixed, c));
  CHECK(fixed[0] == 0.0);
  CHECK(fixed[1] == doctest::Approx(0.5));
  const std::vector<double> U0 = initial_controls(c);
  CHECK(U0.size() == 3000);
  CHECK(U0[0] == 2.5);
  CHECK(U0[1000] == doctest::Approx(2.5 + std::sin(1.0)));
  CHECK(is_feasible(U0, c));
}

TEST_CASE("huge tolerance returns the initial guess") {
  OcpConfig c = small_config();
  c.tolerance = std::numeric_limits<double>::infinity();
  const DesignResult r = design_pulse(c);
  CHECK(r.converged);
  CHECK(r.iterations == 0);
  CHECK(r.residual_history.size() == 1);
  CHECK(r.envelope.values() == initial_controls(c));
}

TEST_CASE("design iterations decrease the residual and stay feasible") {
  OcpConfig c = small_config();
  c.horizon = 1.0;
  int calls = 0;
  const DesignResult r = design_pulse(c, [&](int, double, double) { ++calls; });
  CHECK(calls == r.iterations + 1);
  REQUIRE(r.residual_history.size() == static_cast<std::size_t>(r.iterations + 1));
  for (std::size_t i = 1; i < r.residual_history.size(); ++i) {
    CHECK(r.residual_history[i] < r.residual_history[i - 1]);
  }
  CHECK(r.residual_history.back() < 0.5 * r.residual_history.front());
  CHECK(is_feasible(r.envelope.values(), c, 0.0));
  CHECK(r.terminal_residual == r.residual_history.back());
}

TEST_CASE("coarsened controls are held over blocks") {
  OcpConfig c = small_config();
  c.coarsen = 5;
  c.max_iters = 3;
  const DesignResult r = design_pulse(c);
  REQUIRE(r.envelope.steps() == 100);
  for (std::size_t k = 0; k < 100; ++k) CHECK(r.envelope.values()[k] == r.envelope.values()[k - k % 5]);
}
