#include "becsplit/moment_ocp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace becsplit {

namespace {

[[noreturn]] void invalid(const std::string& what) {
  throw std::invalid_argument("invalid design configuration: " + what);
}

std::vector<double> expand_controls(const std::vector<double>& U, int coarsen) {
  if (coarsen == 1) return U;
  std::vector<double> fine;
  fine.reserve(U.size() * static_cast<std::size_t>(coarsen));
  for (double u : U) fine.insert(fine.end(), static_cast<std::size_t>(coarsen), u);
  return fine;
}

Eigen::MatrixXd coarsen_columns(const Eigen::MatrixXd& H, int coarsen) {
  if (coarsen == 1) return H;
  const Eigen::Index cols = H.cols() / coarsen;
  Eigen::MatrixXd out(H.rows(), cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    out.col(j) = H.middleCols(j * coarsen, coarsen).rowwise().sum();
  }
  return out;
}

}  // namespace

void OcpConfig::validate() const {
  if (n_plus < 1) invalid("n_plus must be >= 1");
  if (n < 1 || n > n_plus) invalid("target n must satisfy 1 <= n <= n_plus");
  if (!(delta > 0.0 && delta < 1.0)) invalid("delta must lie in (0, 1)");
  if (order < 1) invalid("moment order N must be >= 1");
  if (static_cast<long>(order) * 2 * (n_plus + 1) > kMaxMomentGeneratorDim) {
    invalid("moment state dimension N * 2(n_plus + 1) exceeds " +
            std::to_string(kMaxMomentGeneratorDim));
  }
  if (!(dt > 0.0)) invalid("dt must be > 0");
  if (!(horizon > 0.0)) invalid("horizon T must be > 0");
  const double ratio = horizon / dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-6 * std::max(1.0, ratio)) {
    invalid("dt must divide the horizon T");
  }
  if (!(omega_min < omega_max)) invalid("omega_min must be < omega_max");
  if (!(slew_min < 0.0 && 0.0 < slew_max)) invalid("slew bounds must satisfy slew_min < 0 < slew_max");
  if (!(lambda > 0.0)) invalid("lambda must be > 0");
  if (!(lambda_max >= lambda)) invalid("lambda_max must be >= lambda");
  if (tolerance && !(*tolerance > 0.0)) invalid("tolerance must be > 0");
  if (max_iters < 0) invalid("max_iters must be >= 0");
  if (coarsen < 1) invalid("coarsen must be >= 1");
  if (steps() % coarsen != 0) invalid("coarsen must divide the number of steps");
  if (initial_guess.values && static_cast<int>(initial_guess.values->size()) != control_count()) {
    invalid("initial guess has " + std::to_string(initial_guess.values->size()) +
            " values, expected " + std::to_string(control_count()));
  }
}

int OcpConfig::steps() const { return static_cast<int>(std::lround(horizon / dt)); }

double OcpConfig::effective_tolerance() const {
  // ||m(0)|| = sqrt(2) for the rest ensemble
  return tolerance.value_or(0.02 * std::numbers::sqrt2);
}

TargetMask::TargetMask(int n, int order, const Truncation& spec) {
  if (n < 0 || n > spec.n_plus) throw std::invalid_argument("mask level outside the truncation");
  const int D = spec.real_dim();
  mask_ = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(order) * D);
  for (int k = 0; k < order; ++k) {
    mask_(k * D + 2 * n) = 0.0;
    mask_(k * D + 2 * n + 1) = 0.0;
  }
}

MomentState step_map(const MomentState& m, double omega, const OcpConfig& cfg) {
  const MomentNodeBasis basis(m.order(), cfg.delta, cfg.truncation());
  return moment_step(basis, m, omega, cfg.dt);
}

StepJacobians step_jacobians(const MomentState& m, double omega, const OcpConfig& cfg) {
  return reference::step_jacobians(m, omega, cfg.delta, cfg.truncation(), cfg.dt);
}

Eigen::MatrixXd assemble_H(const std::vector<Eigen::MatrixXd>& A_list,
                           const std::vector<Eigen::VectorXd>& B_list) {
  if (A_list.size() != B_list.size()) throw std::invalid_argument("A and B lists differ in length");
  if (A_list.empty()) throw std::invalid_argument("need at least one step");
  const Eigen::Index n = B_list.front().size();
  const auto steps = static_cast<Eigen::Index>(B_list.size());
  Eigen::MatrixXd H(n, steps);
  // tail holds A_K ... A_{k+1}
  Eigen::MatrixXd tail = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index k = steps - 1; k >= 0; --k) {
    if (A_list[k].rows() != n || A_list[k].cols() != n || B_list[k].size() != n) {
      throw std::invalid_argument("step Jacobians have inconsistent sizes");
    }
    H.col(k).noalias() = tail * B_list[k];
    if (k > 0) tail = tail * A_list[k];
  }
  return H;
}

TerminalResidual terminal_residual(const MomentState& m_T, const TargetMask& mask) {
  if (m_T.values().size() != mask.values().size()) {
    throw std::invalid_argument("mask and moment state differ in size");
  }
  TerminalResidual r;
  r.f = m_T.values().cwiseProduct(mask.values());
  r.norm = r.f.norm();
  return r;
}

bool is_feasible(const std::vector<double>& U, const OcpConfig& cfg, double slack) {
  for (std::size_t k = 0; k < U.size(); ++k) {
    if (U[k] < cfg.omega_min - slack || U[k] > cfg.omega_max + slack) return false;
    if (k + 1 < U.size()) {
      const double d = U[k + 1] - U[k];
      if (d < cfg.slew_min * cfg.dt - slack || d > cfg.slew_max * cfg.dt + slack) return false;
    }
  }
  return true;
}

std::vector<double> make_feasible(std::vector<double> U, const OcpConfig& cfg) {
  for (std::size_t k = 0; k < U.size(); ++k) {
    double lo = cfg.omega_min;
    double hi = cfg.omega_max;
    if (k > 0) {
      lo = std::max(lo, U[k - 1] + cfg.slew_min * cfg.dt);
      hi = std::min(hi, U[k - 1] + cfg.slew_max * cfg.dt);
    }
    U[k] = std::clamp(U[k], lo, hi);
    if (k > 0) {
      // lo/hi were rounded when formed; step off by ulps until the
      // difference itself is inside the window.
      while (U[k] - U[k - 1] > cfg.slew_max * cfg.dt) U[k] = std::nextafter(U[k], -HUGE_VAL);
      while (U[k] - U[k - 1] < cfg.slew_min * cfg.dt) U[k] = std::nextafter(U[k], HUGE_VAL);
    }
  }
  return U;
}

std::vector<double> initial_controls(const OcpConfig& cfg) {
  if (cfg.initial_guess.values) return make_feasible(*cfg.initial_guess.values, cfg);
  const int count = cfg.control_count();
  std::vector<double> U(static_cast<std::size_t>(count));
  const auto& g = cfg.initial_guess;
  for (int j = 0; j < count; ++j) {
    const double t = static_cast<double>(j) * cfg.coarsen * cfg.dt;
    U[j] = g.offset + g.amplitude * std::sin(g.frequency * t);
  }
  return make_feasible(std::move(U), cfg);
}

QpStep qp_subproblem(const Eigen::MatrixXd& H, const Eigen::VectorXd& f,
                     const std::vector<double>& U, const OcpConfig& cfg, double lambda,
                     const QpSolution* warm) {
  const auto n = static_cast<Eigen::Index>(U.size());
  if (H.cols() != n) throw std::invalid_argument("H has one column per control");
  if (H.rows() != f.size()) throw std::invalid_argument("H rows must match the residual size");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  if (!is_feasible(U, cfg, 1e-9)) {
    throw std::logic_error("QP subproblem linearized at an infeasible control; dU = 0 must be feasible");
  }

  // dU'(H'H + lambda I)dU + f'H dU  ==  1/2 dU' P dU + q' dU, scaled by
  // 1/|q|_inf so the solver's absolute tolerances act relative to the
  // gradient. Near a saddle |q| can be far below qp_tol.
  const Eigen::VectorXd grad = H.transpose() * f;
  const double gmax = grad.lpNorm<Eigen::Infinity>();
  const double scale = gmax > 0.0 ? 1.0 / gmax : 1.0;
  QpProblem qp{QpHessian::low_rank(std::sqrt(2.0 * scale) * H, 2.0 * lambda * scale), scale * grad, {}};
  qp.constraints.reserve(static_cast<std::size_t>(2 * n));
  for (Eigen::Index k = 0; k < n; ++k) {
    qp.constraints.push_back({{{k, 1.0}}, cfg.omega_min - U[k], cfg.omega_max - U[k]});
  }
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const double d = U[k + 1] - U[k];
    qp.constraints.push_back(
        {{{k, -1.0}, {k + 1, 1.0}}, cfg.slew_min * cfg.dt - d, cfg.slew_max * cfg.dt - d});
  }

  QpOptions opt;
  opt.tol = cfg.qp_tol;
  opt.max_iters = cfg.qp_max_iters;
  if (warm && warm->x.size() == n && warm->y.size() == static_cast<Eigen::Index>(qp.constraints.size())) {
    opt.warm_x = warm->x;
    opt.warm_y = scale * warm->y;
  }
  QpStep step;
  step.solution = solve(qp, opt);
  if (step.solution.status == QpStatus::infeasible) {
    throw std::logic_error("QP subproblem reported infeasible although dU = 0 is feasible");
  }
  step.solution.y /= scale;
  step.delta_u = step.solution.x;
  return step;
}

DesignResult design_pulse(const OcpConfig& cfg, const DesignProgress& progress) {
  cfg.validate();
  const Truncation spec = cfg.truncation();
  const MomentNodeBasis basis(cfg.order, cfg.delta, spec);
  const MomentState m0 = MomentState::rest(cfg.order, spec);
  const Eigen::VectorXd z0 = basis.to_nodes(m0.values());
  // Every block carries the same level mask, so it commutes with the node
  // transform and residuals can be taken in node coordinates.
  const Eigen::VectorXd mask = TargetMask(cfg.n, cfg.order, spec).values();
  const double tol = cfg.effective_tolerance();

  auto residual_of = [&](const std::vector<double>& U) {
    const std::vector<double> fine = expand_controls(U, cfg.coarsen);
    return moment_rollout_nodes(basis, z0, fine, cfg.dt).cwiseProduct(mask).norm();
  };

  std::vector<double> U = initial_controls(cfg);
  double residual = residual_of(U);
  std::vector<double> history{residual};
  double lambda = cfg.lambda;
  bool converged = residual < tol;
  int accepted = 0;
  if (progress) progress(0, residual, lambda);

  std::optional<QpSolution> warm;
  for (int it = 0; it < cfg.max_iters && !converged; ++it) {
    const std::vector<double> fine = expand_controls(U, cfg.coarsen);
    const TerminalSensitivity sens = terminal_sensitivity(basis, m0, fine, cfg.dt);
    const Eigen::MatrixXd H = coarsen_columns(sens.H, cfg.coarsen);
    const Eigen::VectorXd f = sens.terminal.cwiseProduct(mask);

    bool stalled = false;
    while (true) {
      const QpStep step = qp_subproblem(H, f, U, cfg, lambda, warm ? &*warm : nullptr);
      std::vector<double> candidate(U.size());
      for (std::size_t k = 0; k < U.size(); ++k) candidate[k] = U[k] + step.delta_u(k);
      candidate = make_feasible(std::move(candidate), cfg);
      const double r_new = residual_of(candidate);
      if (r_new < residual) {
        U = std::move(candidate);
        residual = r_new;
        lambda = std::max(0.5 * lambda, cfg.lambda);
        warm = step.solution;
        break;
      }
      lambda *= 10.0;
      warm.reset();
      if (lambda > cfg.lambda_max) {
        stalled = true;
        break;
      }
    }
    if (stalled) break;
    ++accepted;
    history.push_back(residual);
    converged = residual < tol;
    if (progress) progress(accepted, residual, lambda);
  }

  DesignResult out{PulseEnvelope(cfg.dt, expand_controls(U, cfg.coarsen)), std::move(history),
                   residual, converged, accepted, lambda};
  return out;
}

}  // namespace becsplit
