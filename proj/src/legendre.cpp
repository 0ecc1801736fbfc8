#include "becsplit/legendre.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

namespace becsplit {

double recursion_coeff(int k) {
  if (k < 0) throw std::invalid_argument("recursion coefficient index must be >= 0");
  const double kk = static_cast<double>(k);
  return (kk + 1.0) / std::sqrt((2.0 * kk + 1.0) * (2.0 * kk + 3.0));
}

Eigen::VectorXd legendre_normalized_all(int count, double x) {
  if (count < 0) throw std::invalid_argument("polynomial count must be >= 0");
  Eigen::VectorXd p(count);
  if (count == 0) return p;
  p(0) = 1.0 / std::numbers::sqrt2;
  if (count == 1) return p;
  p(1) = std::sqrt(1.5) * x;
  // x P_k = c_{k-1} P_{k-1} + c_k P_{k+1}
  for (int k = 1; k + 1 < count; ++k) {
    p(k + 1) = (x * p(k) - recursion_coeff(k - 1) * p(k - 1)) / recursion_coeff(k);
  }
  return p;
}

double legendre_normalized(int k, double x) {
  if (k < 0) throw std::invalid_argument("polynomial degree must be >= 0");
  if (std::abs(x) > 1.0) throw std::invalid_argument("Legendre argument must lie in [-1, 1]");
  return legendre_normalized_all(k + 1, x)(k);
}

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("quadrature needs at least one node");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  rule.exact_degree = 2 * n - 1;
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Newton on the classical P_n, starting from the Tricomi estimate.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = (n == 1) ? x : p1;
      const double pnm1 = (n == 1) ? 1.0 : p0;
      dp = n * (x * pn - pnm1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // refresh the derivative at the converged node
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const double pn = (n == 1) ? x : p1;
    const double pnm1 = (n == 1) ? 1.0 : p0;
    dp = n * (x * pn - pnm1) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes(i) = -x;
    rule.nodes(n - 1 - i) = x;
    rule.weights(i) = w;
    rule.weights(n - 1 - i) = w;
  }
  if (n % 2 == 1) rule.nodes(n / 2) = 0.0;
  return rule;
}

EnsembleParameterMap::EnsembleParameterMap(double delta_) : delta(delta_) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
}

MomentState::MomentState(int order, int block_dim)
    : MomentState(order, block_dim,
                  Eigen::VectorXd::Zero(static_cast<Eigen::Index>(order) * block_dim)) {}

MomentState::MomentState(int order, int block_dim, Eigen::VectorXd values)
    : order_(order), block_dim_(block_dim), values_(std::move(values)) {
  if (order_ < 1 || block_dim_ < 1) throw std::invalid_argument("moment state needs order, block >= 1");
  if (values_.size() != static_cast<Eigen::Index>(order_) * block_dim_) {
    throw std::invalid_argument("moment state length does not match order * block_dim");
  }
}

MomentState MomentState::rest(int order, const Truncation& spec) {
  MomentState m(order, spec.real_dim());
  m.block(0) = std::numbers::sqrt2 * rest_state(spec);
  return m;
}

MomentState moments_from_ensemble(const std::vector<RealState>& samples, const QuadratureRule& rule,
                                  int order) {
  if (samples.size() != rule.size()) {
    throw std::invalid_argument("ensemble has " + std::to_string(samples.size()) +
                                " samples but the rule has " + std::to_string(rule.size()) +
                                " nodes");
  }
  if (samples.empty()) throw std::invalid_argument("ensemble is empty");
  const int dim = static_cast<int>(samples.front().size());
  MomentState m(order, dim);
  for (std::size_t j = 0; j < samples.size(); ++j) {
    if (samples[j].size() != dim) throw std::invalid_argument("ensemble states differ in size");
    const Eigen::VectorXd p = legendre_normalized_all(order, rule.nodes(j));
    for (int k = 0; k < order; ++k) m.block(k) += (rule.weights(j) * p(k)) * samples[j];
  }
  return m;
}

RealState ensemble_from_moments(const MomentState& m, double x) {
  const Eigen::VectorXd p = legendre_normalized_all(m.order(), x);
  RealState out = RealState::Zero(m.block_dim());
  for (int k = 0; k < m.order(); ++k) out += p(k) * m.block(k);
  return out;
}

Eigen::MatrixXd coupling_tridiagonal(int order) {
  if (order < 2) throw std::invalid_argument("coupling matrix needs N >= 2");
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(order, order);
  for (int k = 0; k + 1 < order; ++k) {
    C(k, k + 1) = recursion_coeff(k);
    C(k + 1, k) = recursion_coeff(k);
  }
  return C;
}

namespace {

void check_generator_dims(int order, const Truncation& spec) {
  if (order < 1) throw std::invalid_argument("moment order must be >= 1");
  const Eigen::Index dim = static_cast<Eigen::Index>(order) * spec.real_dim();
  if (dim > kMaxMomentGeneratorDim) {
    throw std::length_error("moment generator dimension " + std::to_string(dim) +
                            " exceeds the limit " + std::to_string(kMaxMomentGeneratorDim));
  }
}

}  // namespace

Eigen::MatrixXd build_moment_generator(double omega, double delta, int order,
                                       const Truncation& spec) {
  check_generator_dims(order, spec);
  const Eigen::MatrixXd nominal = real_embed_generator(build_coupling_matrix(1.0, omega, spec));
  Eigen::MatrixXd M = Eigen::kroneckerProduct(Eigen::MatrixXd::Identity(order, order), nominal);
  if (order >= 2) {
    const Eigen::MatrixXd dispersion = real_embed_generator(
        build_coupling_matrix(delta, omega, spec) - build_coupling_matrix(delta, 0.0, spec));
    M += Eigen::kroneckerProduct(coupling_tridiagonal(order), dispersion);
  }
  return M;
}

Eigen::MatrixXd moment_generator_derivative(double delta, int order, const Truncation& spec) {
  check_generator_dims(order, spec);
  const Eigen::MatrixXd TJ = real_embed_generator(0.5 * coupling_pattern(spec));
  Eigen::MatrixXd S = Eigen::MatrixXd::Identity(order, order);
  if (order >= 2) S += delta * coupling_tridiagonal(order);
  return Eigen::kroneckerProduct(S, TJ);
}

}  // namespace becsplit
