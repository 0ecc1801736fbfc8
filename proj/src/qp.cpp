#include "becsplit/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/SparseCholesky>

namespace becsplit {

using SpMat = Eigen::SparseMatrix<double>;

QpHessian QpHessian::dense(Eigen::MatrixXd P) {
  if (P.rows() != P.cols()) throw std::invalid_argument("QP Hessian must be square");
  const double scale = std::max(1.0, P.cwiseAbs().maxCoeff());
  if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("QP Hessian must be symmetric");
  }
  QpHessian h;
  h.P_ = std::move(P);
  return h;
}

QpHessian QpHessian::low_rank(Eigen::MatrixXd F, double diag) {
  if (!(diag > 0.0)) throw std::invalid_argument("low-rank QP Hessian needs a positive diagonal");
  QpHessian h;
  h.low_rank_ = true;
  h.F_ = std::move(F);
  h.diag_ = diag;
  return h;
}

Eigen::Index QpHessian::dim() const { return low_rank_ ? F_.cols() : P_.rows(); }

Eigen::VectorXd QpHessian::multiply(const Eigen::VectorXd& x) const {
  if (!low_rank_) return P_ * x;
  const Eigen::VectorXd Fx = F_ * x;
  return F_.transpose() * Fx + diag_ * x;
}

Eigen::MatrixXd QpHessian::to_dense() const {
  if (!low_rank_) return P_;
  Eigen::MatrixXd P = F_.transpose() * F_;
  P.diagonal().array() += diag_;
  return P;
}

QpHessian QpHessian::scaled(double alpha) const {
  if (!(alpha > 0.0)) throw std::invalid_argument("Hessian scale must be positive");
  if (!low_rank_) return dense(alpha * P_);
  return low_rank(std::sqrt(alpha) * F_, alpha * diag_);
}

SpMat QpProblem::constraint_matrix() const {
  std::vector<Eigen::Triplet<double>> trips;
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    for (const auto& [col, v] : constraints[i].row) {
      if (col < 0 || col >= dim()) throw std::invalid_argument("constraint column out of range");
      trips.emplace_back(static_cast<Eigen::Index>(i), col, v);
    }
  }
  SpMat A(static_cast<Eigen::Index>(constraints.size()), dim());
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

double QpProblem::objective(const Eigen::VectorXd& x) const {
  return 0.5 * x.dot(P.multiply(x)) + q.dot(x);
}

std::string to_string(QpStatus s) {
  switch (s) {
    case QpStatus::optimal: return "optimal";
    case QpStatus::max_iters: return "max-iters";
    case QpStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

double KktResiduals::max() const { return std::max({primal, dual, complementarity}); }

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Bounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

Bounds collect_bounds(const QpProblem& p) {
  const auto m = static_cast<Eigen::Index>(p.constraints.size());
  Bounds b{Eigen::VectorXd(m), Eigen::VectorXd(m)};
  for (Eigen::Index i = 0; i < m; ++i) {
    b.lower(i) = p.constraints[i].lower;
    b.upper(i) = p.constraints[i].upper;
  }
  return b;
}

KktResiduals residuals(const QpProblem& p, const SpMat& A, const Bounds& b, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& y) {
  const Eigen::VectorXd Ax = A * x;
  double prim = 0.0;
  double compl_ = 0.0;
  for (Eigen::Index i = 0; i < Ax.size(); ++i) {
    prim = std::max({prim, b.lower(i) - Ax(i), Ax(i) - b.upper(i)});
    if (y(i) > 0.0) {
      compl_ = std::max(compl_, std::abs(y(i) * (b.upper(i) - Ax(i))));
    } else if (y(i) < 0.0) {
      compl_ = std::max(compl_, std::abs(y(i) * (Ax(i) - b.lower(i))));
    }
  }
  const Eigen::VectorXd grad = p.P.multiply(x) + p.q + A.transpose() * y;
  const double dual = grad.size() ? grad.cwiseAbs().maxCoeff() : 0.0;
  return {prim, dual, compl_};
}

// Solves (P + sigma I + rho A'A) x = rhs.
class KktSolver {
 public:
  KktSolver(const QpHessian& P, const SpMat& A, double sigma) : P_(P), A_(A), sigma_(sigma) {
    AtA_ = SpMat(A.transpose() * A);
  }

  void factor(double rho) {
    const Eigen::Index n = P_.dim();
    if (!P_.is_low_rank()) {
      Eigen::MatrixXd K = P_.matrix() + rho * Eigen::MatrixXd(AtA_);
      K.diagonal().array() += sigma_;
      dense_.compute(K);
      if (dense_.info() != Eigen::Success) throw std::runtime_error("QP KKT factorization failed");
      return;
    }
    SpMat T = rho * AtA_;
    SpMat I(n, n);
    I.setIdentity();
    T += (P_.diag() + sigma_) * I;
    sparse_.compute(T);
    if (sparse_.info() != Eigen::Success) throw std::runtime_error("QP sparse factorization failed");
    const Eigen::MatrixXd& F = P_.factor();
    W_ = sparse_.solve(Eigen::MatrixXd(F.transpose()));
    Eigen::MatrixXd S = F * W_;
    S.diagonal().array() += 1.0;
    capacitance_.compute(S);
    if (capacitance_.info() != Eigen::Success) throw std::runtime_error("QP capacitance factorization failed");
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    if (!P_.is_low_rank()) return dense_.solve(rhs);
    const Eigen::VectorXd t = sparse_.solve(rhs);
    const Eigen::VectorXd u = P_.factor() * t;
    return t - W_ * capacitance_.solve(u);
  }

 private:
  const QpHessian& P_;
  const SpMat& A_;
  double sigma_;
  SpMat AtA_;
  Eigen::LLT<Eigen::MatrixXd> dense_;
  Eigen::SimplicialLLT<SpMat> sparse_;
  Eigen::MatrixXd W_;
  Eigen::LLT<Eigen::MatrixXd> capacitance_;
};

double norm_inf(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Guesses the active set from (z, y), solves the equality-constrained
// problem and refines. Returns nullopt when the guess does not hold up.
std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> polish(
    const QpProblem& p, const SpMat& A, const Bounds& b, const Eigen::VectorXd& z,
    const Eigen::VectorXd& y) {
  const Eigen::Index n = p.dim();
  std::vector<Eigen::Index> rows;
  std::vector<double> rhs_vals;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    if (z(i) - b.lower(i) < -y(i)) {
      rows.push_back(i);
      rhs_vals.push_back(b.lower(i));
    } else if (b.upper(i) - z(i) < y(i)) {
      rows.push_back(i);
      rhs_vals.push_back(b.upper(i));
    }
  }
  const auto na = static_cast<Eigen::Index>(rows.size());
  const Eigen::MatrixXd Ad = Eigen::MatrixXd(A);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + na, n + na);
  K.topLeftCorner(n, n) = p.P.to_dense();
  for (Eigen::Index r = 0; r < na; ++r) {
    K.block(n + r, 0, 1, n) = Ad.row(rows[r]);
    K.block(0, n + r, n, 1) = Ad.row(rows[r]).transpose();
  }
  Eigen::VectorXd rhs(n + na);
  rhs.head(n) = -p.q;
  for (Eigen::Index r = 0; r < na; ++r) rhs(n + r) = rhs_vals[r];

  constexpr double kReg = 1e-10;
  Eigen::MatrixXd Kreg = K;
  Kreg.topLeftCorner(n, n).diagonal().array() += kReg;
  if (na > 0) Kreg.bottomRightCorner(na, na).diagonal().array() -= kReg;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(Kreg);
  Eigen::VectorXd sol = lu.solve(rhs);
  for (int it = 0; it < 5; ++it) sol += lu.solve(rhs - K * sol);
  if (!sol.allFinite()) return std::nullopt;

  Eigen::VectorXd x = sol.head(n);
  Eigen::VectorXd yp = Eigen::VectorXd::Zero(A.rows());
  for (Eigen::Index r = 0; r < na; ++r) {
    const Eigen::Index i = rows[r];
    const double yi = sol(n + r);
    // a lower-active row needs y <= 0, an upper-active row y >= 0
    const bool equality = b.lower(i) == b.upper(i);
    if (!equality && rhs_vals[r] == b.lower(i) && yi > 1e-12) return std::nullopt;
    if (!equality && rhs_vals[r] == b.upper(i) && yi < -1e-12) return std::nullopt;
    yp(i) = yi;
  }
  return std::make_pair(std::move(x), std::move(yp));
}

}  // namespace

KktResiduals kkt_residuals(const QpProblem& problem, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& y) {
  return residuals(problem, problem.constraint_matrix(), collect_bounds(problem), x, y);
}

QpSolution solve(const QpProblem& problem, const QpOptions& opt) {
  const Eigen::Index n = problem.dim();
  if (problem.P.dim() != n) throw std::invalid_argument("QP Hessian and q differ in size");
  const SpMat A = problem.constraint_matrix();
  const Bounds b = collect_bounds(problem);
  const Eigen::Index m = A.rows();

  QpSolution out;
  out.x = Eigen::VectorXd::Zero(n);
  out.y = Eigen::VectorXd::Zero(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (b.lower(i) > b.upper(i)) {
      out.status = QpStatus::infeasible;
      out.objective = problem.objective(out.x);
      return out;
    }
  }

  Eigen::VectorXd x = opt.warm_x.value_or(Eigen::VectorXd::Zero(n));
  Eigen::VectorXd y = opt.warm_y.value_or(Eigen::VectorXd::Zero(m));
  if (x.size() != n || y.size() != m) throw std::invalid_argument("QP warm start has wrong size");
  Eigen::VectorXd z = (A * x).cwiseMax(b.lower).cwiseMin(b.upper);

  double rho = opt.rho;
  KktSolver kkt(problem.P, A, opt.sigma);
  kkt.factor(rho);

  Eigen::VectorXd y_prev = y;
  int iter = 0;
  for (iter = 1; iter <= opt.max_iters; ++iter) {
    const Eigen::VectorXd rhs = opt.sigma * x - problem.q + A.transpose() * (rho * z - y);
    const Eigen::VectorXd x_tilde = kkt.solve(rhs);
    const Eigen::VectorXd z_tilde = A * x_tilde;
    x = opt.alpha * x_tilde + (1.0 - opt.alpha) * x;
    const Eigen::VectorXd z_relax = opt.alpha * z_tilde + (1.0 - opt.alpha) * z;
    const Eigen::VectorXd z_new = (z_relax + y / rho).cwiseMax(b.lower).cwiseMin(b.upper);
    y_prev = y;
    y += rho * (z_relax - z_new);
    z = z_new;

    const bool check = (iter % opt.check_interval == 0) || iter == opt.max_iters;
    const bool adapt = m > 0 && (iter % opt.adapt_interval == 0);
    if (!check && !adapt) continue;

    const Eigen::VectorXd Ax = A * x;
    const Eigen::VectorXd Px = problem.P.multiply(x);
    const Eigen::VectorXd Aty = A.transpose() * y;
    const double prim = norm_inf(Ax - z);
    const double dual = norm_inf(Px + problem.q + Aty);

    if (check) {
      if (prim <= opt.tol && dual <= opt.tol && residuals(problem, A, b, x, y).max() <= opt.tol) {
        break;
      }
      // primal infeasibility certificate
      const Eigen::VectorXd dy = y - y_prev;
      const double dy_norm = norm_inf(dy);
      if (dy_norm > 1e-12) {
        const double eps_pinf = 1e-7 * dy_norm;
        double support = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
          if (dy(i) > 0.0) support += (b.upper(i) == kInf) ? kInf : b.upper(i) * dy(i);
          if (dy(i) < 0.0) support += (b.lower(i) == -kInf) ? kInf : b.lower(i) * dy(i);
        }
        if (norm_inf(A.transpose() * dy) <= eps_pinf && support <= -eps_pinf) {
          out.status = QpStatus::infeasible;
          out.x = x;
          out.y = y;
          out.iterations = iter;
          out.objective = problem.objective(x);
          return out;
        }
      }
    }
    if (adapt && prim > 0.0 && dual > 0.0) {
      const double prim_scale = std::max({norm_inf(Ax), norm_inf(z), 1e-12});
      const double dual_scale = std::max({norm_inf(Px), norm_inf(Aty), norm_inf(problem.q), 1e-12});
      const double ratio = (prim / prim_scale) / std::max(dual / dual_scale, 1e-300);
      const double rho_new = std::clamp(rho * std::sqrt(ratio), 1e-6, 1e6);
      if (rho_new > 5.0 * rho || rho_new < 0.2 * rho) {
        rho = rho_new;
        kkt.factor(rho);
      }
    }
  }
  out.iterations = std::min(iter, opt.max_iters);

  KktResiduals res = residuals(problem, A, b, x, y);
  if (opt.polish && n <= opt.polish_max_dim) {
    if (auto pol = polish(problem, A, b, z, y)) {
      const KktResiduals pres = residuals(problem, A, b, pol->first, pol->second);
      if (pres.max() <= std::max(res.max(), opt.tol)) {
        x = pol->first;
        y = pol->second;
        res = pres;
        out.polished = true;
      }
    }
  }

  out.x = x;
  out.y = y;
  out.primal_residual = res.primal;
  out.dual_residual = res.dual;
  out.complementarity = res.complementarity;
  out.kkt_residual = res.max();
  out.objective = problem.objective(x);
  out.status = out.kkt_residual <= opt.tol ? QpStatus::optimal : QpStatus::max_iters;
  return out;
}

}  // namespace becsplit
