#include <doctest.h>

#include <cmath>

#include "becsplit/square_pulse.hpp"
#include "oracles.hpp"

using namespace becsplit;

namespace {

Eigen::VectorXcd square_rk4(const SquarePulseParams& p, double eps, int n_plus) {
  // Each segment integrated on a fine grid with 1000 substeps.
  Eigen::VectorXcd c;
  for (auto [omega, tau] : {std::pair{p.omega1, p.tau1}, {0.0, p.tau2}, {p.omega2, p.tau3}}) {
    if (tau == 0.0) continue;
    c = oracle::rk4({omega}, tau, eps, n_plus, 4000, c);
  }
  return c;
}

const SquarePulseParams kN1{3.9865, 2.2849, 0.4744, 0.9427, 0.4181};

}  // namespace

TEST_CASE("target spec invariants") {
  CHECK_NOTHROW(TargetSpec(4, 24));
  CHECK_THROWS_WITH_AS(TargetSpec(10, 9), doctest::Contains("n_plus"), std::invalid_argument);
  CHECK_THROWS(TargetSpec(0, 9));
  CHECK_THROWS(SampledEnsembleSpec(0.0, 3));
  CHECK_THROWS(SampledEnsembleSpec(0.1, 0));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS((SquarePulseParams{1, 1, -0.1, 0, 0}).validate());
  CHECK_NOTHROW(kN1.validate());
  CHECK(kN1.total_duration() == doctest::Approx(0.4744 + 0.9427 + 0.4181));
  CHECK(SquarePulseParams::from_array(kN1.as_array()).tau2 == kN1.tau2);
}

TEST_CASE("three-factor product agrees with RK4") {
  for (double eps : {0.9, 1.0, 1.1}) {
    const RealState x = propagate_square_sequence(kN1, eps, Truncation(12));
    CHECK((to_complex(x) - square_rk4(kN1, eps, 12)).norm() < 1e-9);
  }
}

TEST_CASE("terminal error against the oracle") {
  const TargetSpec t(1, 24);
  const double err = terminal_error(kN1, 1.05, t);
  CHECK(err == doctest::Approx(oracle::error(square_rk4(kN1, 1.05, 24), 1)).epsilon(1e-8));
  // zero pulse leaves the atoms at rest: || e_n - e_0 || = sqrt(2)
  CHECK(terminal_error(SquarePulseParams{0, 0, 1, 1, 1}, 1.0, t) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("rendered envelope reproduces the exact product") {
  const SquarePulseParams p{4.0, 2.0, 0.5, 1.0, 0.4};
  const PulseEnvelope env = render_square_sequence(p, 0.001);
  CHECK(env.steps() == 1900);
  const Truncation spec(12);
  const RealState a = propagate_terminal(rest_state(spec), env, 1.0, spec);
  const RealState b = propagate_square_sequence(p, 1.0, spec);
  CHECK((a - b).norm() < 1e-10);
}

TEST_CASE("sample epsilons") {
  CHECK(sample_epsilons(SampledEnsembleSpec(0.1, 1)) == std::vector<double>{1.0});
  const auto e = sample_epsilons(SampledEnsembleSpec(0.4, 3));
  REQUIRE(e.size() == 3);
  CHECK(e[0] == doctest::Approx(0.6));
  CHECK(e[1] == doctest::Approx(1.0));
  CHECK(e[2] == 1.4);
}

TEST_CASE("nominal optimizer finds a near-complete n=1 transfer") {
  SquareOptimizerOptions opt;
  opt.restarts = 8;
  opt.seed = 2;
  const TargetSpec t(1, 24);
  const SquareDesign d = optimize_square(t, SampledEnsembleSpec(0.1, 1), SquareBounds{}, opt);
  CHECK(d.success);
  CHECK(d.objective < 0.02);
  CHECK(populations(propagate_square_sequence(d.params, 1.0, t.truncation()))(1) > 0.999);
  CHECK(d.params.omega1 >= 0.0);
  CHECK(d.params.tau1 <= 3.5);
  // result depends only on the seed
  const SquareDesign again = optimize_square(t, SampledEnsembleSpec(0.1, 1), SquareBounds{}, opt);
  CHECK(again.objective == d.objective);
  CHECK(again.params.omega1 == d.params.omega1);
}

TEST_CASE("an extra starting point is never made worse") {
  SquareOptimizerOptions opt;
  opt.restarts = 1;
  opt.screening_samples = 1;
  opt.extra_starts = {kN1};
  const TargetSpec t(1, 24);
  const SampledEnsembleSpec nominal(0.1, 1);
  const SquareDesign d = optimize_square(t, nominal, SquareBounds{}, opt);
  CHECK(d.objective <= sampled_objective(kN1, nominal, t));
}

TEST_CASE("sampled objective never beats its nominal counterpart at eps = 1 alone") {
  const SampledEnsembleSpec three(0.1, 3);
  const TargetSpec t(1, 24);
  CHECK(sampled_objective(kN1, three, t) >= terminal_error(kN1, 1.0, t));
}
