#include <doctest.h>

#include <random>

#include "becsplit/qp.hpp"
#include "oracles.hpp"

using namespace becsplit;

namespace {

struct Dense {
  Eigen::MatrixXd P, A;
  Eigen::VectorXd q, l, u;
};

QpProblem to_problem(const Dense& d) {
  QpProblem p{QpHessian::dense(d.P), d.q, {}};
  for (Eigen::Index i = 0; i < d.A.rows(); ++i) {
    QpConstraint c{{}, d.l(i), d.u(i)};
    for (Eigen::Index j = 0; j < d.A.cols(); ++j) {
      if (d.A(i, j) != 0.0) c.row.emplace_back(j, d.A(i, j));
    }
    p.constraints.push_back(c);
  }
  return p;
}

Dense random_instance(std::mt19937& rng, int n, int m) {
  std::normal_distribution<double> g;
  Dense d;
  Eigen::MatrixXd R(n, n);
  for (auto& v : R.reshaped()) v = g(rng);
  d.P = R * R.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
  d.q.resize(n);
  for (auto& v : d.q) v = 3.0 * g(rng);
  d.A.resize(m, n);
  for (auto& v : d.A.reshaped()) v = g(rng);
  d.l.resize(m);
  d.u.resize(m);
  for (int i = 0; i < m; ++i) {
    const double a = g(rng), b = std::abs(g(rng));
    d.l(i) = a - b;
    d.u(i) = a + b;
  }
  return d;
}

}  // namespace

TEST_CASE("unconstrained problem solves P x = -q") {
  Eigen::MatrixXd P(2, 2);
  P << 4, 1, 1, 3;
  const Eigen::VectorXd q = Eigen::Vector2d(1, 2);
  const QpSolution s = solve({QpHessian::dense(P), q, {}});
  CHECK(s.status == QpStatus::optimal);
  CHECK((s.x - P.ldlt().solve(-q)).norm() < 1e-8);
}

TEST_CASE("box constraint becomes active with correct multiplier sign") {
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::VectorXd q = Eigen::Vector2d(-5, 0.5);
  QpProblem p{QpHessian::dense(P), q, {{{{0, 1.0}}, -1.0, 1.0}, {{{1, 1.0}}, -1.0, 1.0}}};
  const QpSolution s = solve(p);
  CHECK(s.status == QpStatus::optimal);
  CHECK(s.x(0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(s.x(1) == doctest::Approx(-0.5).epsilon(1e-7));
  CHECK(s.y(0) > 0.0);
  CHECK(s.kkt_residual <= 1e-6);
}

TEST_CASE("random 6-dimensional instances agree with brute-force active sets") {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const Dense d = random_instance(rng, 6, 8);
    const oracle::QpOracle o = oracle::brute_force_qp(d.P, d.q, d.A, d.l, d.u);
    const QpSolution s = solve(to_problem(d));
    if (!o.found) {
      CHECK(s.status == QpStatus::infeasible);
      continue;
    }
    REQUIRE(s.status == QpStatus::optimal);
    CHECK((s.x - o.x).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(s.kkt_residual <= 1e-6);
    CHECK(std::abs(s.objective - o.objective) < 1e-8 * std::max(1.0, std::abs(o.objective)));
  }
}

TEST_CASE("low-rank Hessian equals the dense form") {
  std::mt19937 rng(5);
  std::normal_distribution<double> g;
  const int n = 40;
  Eigen::MatrixXd F(7, n);
  for (auto& v : F.reshaped()) v = g(rng);
  Eigen::VectorXd q(n);
  for (auto& v : q) v = g(rng);
  const QpHessian lr = QpHessian::low_rank(F, 0.3);
  CHECK((lr.to_dense() - (F.transpose() * F + 0.3 * Eigen::MatrixXd::Identity(n, n))).norm() < 1e-12);
  QpProblem a{lr, q, {}};
  QpProblem b{QpHessian::dense(lr.to_dense()), q, {}};
  for (int i = 0; i < n; ++i) {
    a.constraints.push_back({{{i, 1.0}}, -0.2, 0.2});
    if (i + 1 < n) a.constraints.push_back({{{i, -1.0}, {i + 1, 1.0}}, -0.05, 0.05});
  }
  b.constraints = a.constraints;
  const QpSolution sa = solve(a);
  const QpSolution sb = solve(b);
  CHECK(sa.status == QpStatus::optimal);
  CHECK(sb.status == QpStatus::optimal);
  CHECK((sa.x - sb.x).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("large banded problem without polish still meets the KKT tolerance") {
  std::mt19937 rng(9);
  std::normal_distribution<double> g;
  const int n = 2000;
  Eigen::MatrixXd F(30, n);
  for (auto& v : F.reshaped()) v = 0.05 * g(rng);
  Eigen::VectorXd q(n);
  for (auto& v : q) v = g(rng);
  QpProblem p{QpHessian::low_rank(F, 1e-2), q, {}};
  for (int i = 0; i < n; ++i) p.constraints.push_back({{{i, 1.0}}, -1.0, 1.0});
  for (int i = 0; i + 1 < n; ++i) p.constraints.push_back({{{i, -1.0}, {i + 1, 1.0}}, -0.5, 0.5});
  const QpSolution s = solve(p);
  CHECK(s.status == QpStatus::optimal);
  CHECK(kkt_residuals(p, s.x, s.y).max() <= 1e-6);
}

TEST_CASE("infeasible constraints are detected") {
  QpProblem p{QpHessian::dense(Eigen::MatrixXd::Identity(1, 1)), Eigen::VectorXd::Zero(1),
              {{{{0, 1.0}}, 1.0, 2.0}, {{{0, 1.0}}, -2.0, -1.0}}};
  CHECK(solve(p).status == QpStatus::infeasible);
  QpProblem crossed{QpHessian::dense(Eigen::MatrixXd::Identity(1, 1)), Eigen::VectorXd::Zero(1),
                    {{{{0, 1.0}}, 1.0, 0.0}}};
  CHECK(solve(crossed).status == QpStatus::infeasible);
}

TEST_CASE("warm start from the solution converges immediately") {
  std::mt19937 rng(77);
  const Dense d = random_instance(rng, 6, 8);
  const QpProblem p = to_problem(d);
  QpOptions opt;
  opt.polish = false;
  const QpSolution cold = solve(p, opt);
  REQUIRE(cold.status == QpStatus::optimal);
  opt.warm_x = cold.x;
  opt.warm_y = cold.y;
  const QpSolution warm = solve(p, opt);
  CHECK(warm.status == QpStatus::optimal);
  CHECK(warm.iterations <= cold.iterations);
}

TEST_CASE("hessian preconditions") {
  Eigen::MatrixXd P(2, 2);
  P << 1, 2, 0, 1;
  CHECK_THROWS(QpHessian::dense(P));
  CHECK_THROWS(QpHessian::low_rank(Eigen::MatrixXd::Ones(2, 3), 0.0));
}
