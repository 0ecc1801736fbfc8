#include "becsplit/square_pulse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "nelder_mead.hpp"

namespace becsplit {

void SquarePulseParams::validate() const {
  for (double v : as_array()) {
    if (!std::isfinite(v)) throw std::invalid_argument("square pulse parameters must be finite");
  }
  if (omega1 < 0.0 || omega2 < 0.0) throw std::invalid_argument("pulse amplitudes must be >= 0");
  if (tau1 < 0.0 || tau2 < 0.0 || tau3 < 0.0) {
    throw std::invalid_argument("pulse durations must be >= 0");
  }
  if (!(total_duration() > 0.0)) throw std::invalid_argument("total pulse duration must be > 0");
}

TargetSpec::TargetSpec(int n_, int n_plus_) : n(n_), n_plus(n_plus_) {
  if (n_plus < 1) throw std::invalid_argument("target truncation requires n_plus >= 1");
  if (n < 1 || n > n_plus) {
    throw std::invalid_argument("target level n=" + std::to_string(n) +
                                " must satisfy 1 <= n <= n_plus=" + std::to_string(n_plus));
  }
}

SampledEnsembleSpec::SampledEnsembleSpec(double delta_, int m_) : delta(delta_), m(m_) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (m < 1) throw std::invalid_argument("sample count m must be >= 1");
}

RealState propagate_square_sequence(const SquarePulseParams& params, double eps,
                                    const Truncation& spec) {
  params.validate();
  LevelPropagator prop(spec);
  QuantumState c = to_complex(rest_state(spec));
  prop.set_drive(eps * params.omega1);
  prop.apply(params.tau1, c);
  prop.set_drive(0.0);
  prop.apply(params.tau2, c);
  prop.set_drive(eps * params.omega2);
  prop.apply(params.tau3, c);
  return to_real(c);
}

PulseEnvelope render_square_sequence(const SquarePulseParams& params, double dt) {
  params.validate();
  auto count = [dt](double tau) { return static_cast<std::size_t>(std::llround(tau / dt)); };
  const std::size_t n1 = count(params.tau1);
  const std::size_t n2 = count(params.tau2);
  const std::size_t n3 = count(params.tau3);
  std::vector<double> v;
  v.reserve(n1 + n2 + n3);
  v.insert(v.end(), n1, params.omega1);
  v.insert(v.end(), n2, 0.0);
  v.insert(v.end(), n3, params.omega2);
  if (v.empty()) throw std::invalid_argument("pulse sequence shorter than one grid step");
  return PulseEnvelope(dt, std::move(v));
}

double terminal_error(const RealState& terminal, int n) {
  const Eigen::VectorXd pop = populations(terminal);
  if (n < 0 || n >= pop.size()) throw std::invalid_argument("target level outside the state");
  double sum = 0.0;
  for (Eigen::Index j = 0; j < pop.size(); ++j) {
    const double mod = std::sqrt(pop(j));
    const double diff = (j == n ? 1.0 : 0.0) - mod;
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

double terminal_error(const SquarePulseParams& params, double eps, const TargetSpec& target) {
  return terminal_error(propagate_square_sequence(params, eps, target.truncation()), target.n);
}

std::vector<double> sample_epsilons(const SampledEnsembleSpec& spec) {
  if (spec.m == 1) return {1.0};
  std::vector<double> eps(spec.m);
  const double lo = 1.0 - spec.delta;
  const double width = 2.0 * spec.delta;
  for (int i = 0; i < spec.m; ++i) {
    eps[i] = lo + width * static_cast<double>(i) / static_cast<double>(spec.m - 1);
  }
  eps.back() = 1.0 + spec.delta;
  return eps;
}

double sampled_objective(const SquarePulseParams& params, const SampledEnsembleSpec& spec,
                         const TargetSpec& target) {
  double total = 0.0;
  for (double eps : sample_epsilons(spec)) total += terminal_error(params, eps, target);
  return total;
}

SquareDesign optimize_square(const TargetSpec& target, const SampledEnsembleSpec& spec,
                             const SquareBounds& bounds, const SquareOptimizerOptions& options) {
  const auto lo = bounds.lower.as_array();
  const auto hi = bounds.upper.as_array();
  for (std::size_t i = 0; i < 5; ++i) {
    if (!(lo[i] <= hi[i])) throw std::invalid_argument("square pulse bounds box is empty");
    if (lo[i] < 0.0) throw std::invalid_argument("square pulse bounds must be non-negative");
  }
  if (options.restarts < 0) throw std::invalid_argument("restarts must be >= 0");

  const auto eps_samples = sample_epsilons(spec);
  const Truncation trunc = target.truncation();
  // Points with zero total duration are outside the model; score them as
  // the rest state.
  const double rest_error = std::sqrt(2.0) * static_cast<double>(eps_samples.size());
  std::function<double(const std::array<double, 5>&)> objective =
      [&](const std::array<double, 5>& a) {
        const auto p = SquarePulseParams::from_array(a);
        if (!(p.total_duration() > 0.0)) return rest_error;
        double total = 0.0;
        for (double eps : eps_samples) {
          total += terminal_error(propagate_square_sequence(p, eps, trunc), target.n);
        }
        return total;
      };

  // Screen random points and start the local searches from the best ones.
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int screened = std::max(options.screening_samples, options.restarts);
  std::vector<std::array<double, 5>> candidates(static_cast<std::size_t>(screened));
  for (auto& p : candidates) {
    for (std::size_t i = 0; i < 5; ++i) p[i] = lo[i] + unit(rng) * (hi[i] - lo[i]);
  }
  std::vector<double> scores(candidates.size());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < screened; ++i) scores[i] = objective(candidates[i]);
  std::vector<std::size_t> rank(candidates.size());
  std::iota(rank.begin(), rank.end(), 0);
  std::stable_sort(rank.begin(), rank.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });

  std::vector<std::array<double, 5>> starts;
  for (const auto& s : options.extra_starts) starts.push_back(s.as_array());
  for (int r = 0; r < options.restarts; ++r) starts.push_back(candidates[rank[r]]);
  if (starts.empty()) starts.push_back(lo);

  std::vector<detail::NelderMeadResult<5>> results(starts.size());
  const long count = static_cast<long>(starts.size());
#pragma omp parallel for schedule(dynamic)
  for (long r = 0; r < count; ++r) {
    results[r] = detail::nelder_mead_box<5>(objective, starts[r], lo, hi, options.max_evaluations,
                                            options.simplex_tolerance);
  }

  std::size_t best = 0;
  for (std::size_t r = 1; r < results.size(); ++r) {
    const auto& a = results[r];
    const auto& b = results[best];
    const double ta = a.x[2] + a.x[3] + a.x[4];
    const double tb = b.x[2] + b.x[3] + b.x[4];
    if (a.value < b.value || (a.value == b.value && ta < tb)) best = r;
  }

  SquareDesign out;
  out.params = SquarePulseParams::from_array(results[best].x);
  out.objective = results[best].value;
  out.evaluations = screened;
  for (const auto& r : results) out.evaluations += r.evaluations;
  out.success = out.objective <= options.failure_threshold;
  return out;
}

}  // namespace becsplit
