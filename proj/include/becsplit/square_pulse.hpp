#pragma once

// Two-pulse square sequences: amplitude omega1 for tau1, a free gap tau2,
// then omega2 for tau3. Nominal (single eps) and sampled-eps design problems.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "becsplit/rne.hpp"

namespace becsplit {

struct SquarePulseParams {
  double omega1 = 0.0;
  double omega2 = 0.0;
  double tau1 = 0.0;
  double tau2 = 0.0;
  double tau3 = 0.0;

  double total_duration() const { return tau1 + tau2 + tau3; }
  void validate() const;

  std::array<double, 5> as_array() const { return {omega1, omega2, tau1, tau2, tau3}; }
  static SquarePulseParams from_array(const std::array<double, 5>& a) {
    return {a[0], a[1], a[2], a[3], a[4]};
  }
};

// Target diffraction level n (state C_2n+) inside an n_plus truncation.
struct TargetSpec {
  int n = 1;
  int n_plus = 24;

  TargetSpec(int n_, int n_plus_);
  Truncation truncation() const { return Truncation(n_plus); }
};

struct SampledEnsembleSpec {
  double delta = 0.1;
  int m = 1;

  SampledEnsembleSpec(double delta_, int m_);
};

// Exact three-factor product applied to the rest state.
RealState propagate_square_sequence(const SquarePulseParams& params, double eps,
                                    const Truncation& spec);

// Zero-order-hold rendering on a dt grid. Interval boundaries are rounded to
// the nearest grid point.
PulseEnvelope render_square_sequence(const SquarePulseParams& params, double dt);

// || |C_f| - |C(tau_ps, eps)| ||_2 with C_f the unit vector at level n.
double terminal_error(const SquarePulseParams& params, double eps, const TargetSpec& target);

// Same norm for an arbitrary terminal state.
double terminal_error(const RealState& terminal, int n);

std::vector<double> sample_epsilons(const SampledEnsembleSpec& spec);

double sampled_objective(const SquarePulseParams& params, const SampledEnsembleSpec& spec,
                         const TargetSpec& target);

struct SquareBounds {
  SquarePulseParams lower{0.0, 0.0, 0.0, 0.0, 0.0};
  SquarePulseParams upper{60.0, 60.0, 3.5, 3.5, 3.5};
};

struct SquareOptimizerOptions {
  int restarts = 20;
  // Random points scored before the local searches; the best `restarts` of
  // them become starting points.
  int screening_samples = 2000;
  std::uint64_t seed = 1;
  int max_evaluations = 3000;  // per restart
  double simplex_tolerance = 1e-10;
  double failure_threshold = 0.5;
  // Extra starting points tried in addition to the random ones.
  std::vector<SquarePulseParams> extra_starts;
};

struct SquareDesign {
  SquarePulseParams params;
  double objective = 0.0;
  int evaluations = 0;
  bool success = false;
};

// Multi-start bounded Nelder-Mead over the five parameters. Restarts run
// concurrently; the result only depends on the seed.
SquareDesign optimize_square(const TargetSpec& target, const SampledEnsembleSpec& spec,
                             const SquareBounds& bounds, const SquareOptimizerOptions& options);

}  // namespace becsplit
