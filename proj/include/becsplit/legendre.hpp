#pragma once

// Normalized Legendre basis on [-1, 1], Gauss-Legendre quadrature, and the
// moment representation of an eps-parameterized ensemble of level states.
//
// Ensemble parameter map: eps = 1 + delta * x with x in [-1, 1].

#include <vector>

#include <Eigen/Dense>

#include "becsplit/rne.hpp"

namespace becsplit {

// Upper bound on the assembled moment-generator dimension N * 2(N+ + 1).
inline constexpr Eigen::Index kMaxMomentGeneratorDim = 4096;

// c_k = (k + 1) / sqrt((2k + 1)(2k + 3))
double recursion_coeff(int k);

// Orthonormal Legendre polynomial of degree k at x.
double legendre_normalized(int k, double x);

// All P_0(x) ... P_{count-1}(x).
Eigen::VectorXd legendre_normalized_all(int count, double x);

struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
  int exact_degree = 0;

  std::size_t size() const { return static_cast<std::size_t>(nodes.size()); }
};

// n-point Gauss-Legendre rule on [-1, 1] (exact through degree 2n - 1).
QuadratureRule gauss_legendre(int n);

struct EnsembleParameterMap {
  double delta;

  explicit EnsembleParameterMap(double delta_);
  double to_eps(double x) const { return 1.0 + delta * x; }
  double to_unit(double eps) const { return (eps - 1.0) / delta; }
};

// Stacked moments m_0 ... m_{N-1}; each block has the layout of a RealState.
class MomentState {
 public:
  MomentState(int order, int block_dim);
  MomentState(int order, int block_dim, Eigen::VectorXd values);

  int order() const { return order_; }
  int block_dim() const { return block_dim_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }

  auto block(int k) { return values_.segment(static_cast<Eigen::Index>(k) * block_dim_, block_dim_); }
  auto block(int k) const {
    return values_.segment(static_cast<Eigen::Index>(k) * block_dim_, block_dim_);
  }

  // Moments of an ensemble sitting at the rest state for every eps.
  static MomentState rest(int order, const Truncation& spec);

 private:
  int order_;
  int block_dim_;
  Eigen::VectorXd values_;
};

// block k = sum_j w_j * samples[j] * P_k(x_j)
MomentState moments_from_ensemble(const std::vector<RealState>& samples, const QuadratureRule& rule,
                                  int order);

// sum_k m_k * P_k(x)
RealState ensemble_from_moments(const MomentState& m, double x);

// Symmetric tridiagonal with zero diagonal and off-diagonal c_0 ... c_{N-2}.
Eigen::MatrixXd coupling_tridiagonal(int order);

// M(omega) = I(N) (x) (A(1, omega) (x) J)
//          + C(N) (x) ((A(delta, omega) - A(delta, 0)) (x) J)
// Order 1 has no coupling term.
Eigen::MatrixXd build_moment_generator(double omega, double delta, int order,
                                       const Truncation& spec);

// dM/domega; independent of omega.
Eigen::MatrixXd moment_generator_derivative(double delta, int order, const Truncation& spec);

}  // namespace becsplit
