#pragma once

// Convex QP solver:
//
//   minimize    1/2 x' P x + q' x
//   subject to  lower <= A x <= upper
//
// ADMM with over-relaxation and adaptive step size, followed by an optional
// active-set polish. P is either dense or given as F' F + d I, the second
// form keeps the per-iteration linear solve at O(n r) through the Woodbury
// identity.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace becsplit {

class QpHessian {
 public:
  static QpHessian dense(Eigen::MatrixXd P);
  // P = F' F + diag * I, diag > 0.
  static QpHessian low_rank(Eigen::MatrixXd F, double diag);

  Eigen::Index dim() const;
  bool is_low_rank() const { return low_rank_; }
  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd to_dense() const;

  const Eigen::MatrixXd& matrix() const { return P_; }
  const Eigen::MatrixXd& factor() const { return F_; }
  double diag() const { return diag_; }

  QpHessian scaled(double alpha) const;

 private:
  bool low_rank_ = false;
  Eigen::MatrixXd P_;
  Eigen::MatrixXd F_;
  double diag_ = 0.0;
};

struct QpConstraint {
  std::vector<std::pair<Eigen::Index, double>> row;
  double lower;
  double upper;
};

struct QpProblem {
  QpHessian P;
  Eigen::VectorXd q;
  std::vector<QpConstraint> constraints;

  Eigen::Index dim() const { return q.size(); }
  Eigen::SparseMatrix<double> constraint_matrix() const;
  double objective(const Eigen::VectorXd& x) const;
};

enum class QpStatus { optimal, max_iters, infeasible };

std::string to_string(QpStatus s);

struct QpSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd y;  // y > 0 on upper-active rows, y < 0 on lower-active rows
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double complementarity = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool polished = false;
  QpStatus status = QpStatus::max_iters;
};

struct QpOptions {
  double tol = 1e-6;
  int max_iters = 20000;
  double rho = 0.1;
  double sigma = 1e-6;
  double alpha = 1.6;
  int check_interval = 5;
  int adapt_interval = 25;
  bool polish = true;
  Eigen::Index polish_max_dim = 1200;
  std::optional<Eigen::VectorXd> warm_x;
  std::optional<Eigen::VectorXd> warm_y;
};

QpSolution solve(const QpProblem& problem, const QpOptions& options = {});

// KKT residuals (primal, dual, complementarity) for a candidate pair.
struct KktResiduals {
  double primal;
  double dual;
  double complementarity;
  double max() const;
};
KktResiduals kkt_residuals(const QpProblem& problem, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& y);

}  // namespace becsplit
