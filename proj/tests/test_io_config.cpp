#include <doctest.h>

#include <filesystem>

#include "becsplit/config.hpp"
#include "becsplit/io.hpp"

using namespace becsplit;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "becsplit_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("envelope CSV round trip is lossless") {
  const PulseEnvelope env(0.001, {2.5, 2.5000000000000004, 3.141592653589793, 1e-300, 99.99999999999999});
  const std::string text = io::envelope_csv(env);
  CHECK(text.rfind("t,omega\n", 0) == 0);
  const PulseEnvelope back = io::parse_envelope_csv(text);
  CHECK(back.dt() == env.dt());
  CHECK(back.values() == env.values());
  CHECK_THROWS_AS(io::parse_envelope_csv("t,omega\n0,1\n"), io::IoError);
  CHECK_THROWS_AS(io::parse_envelope_csv("time,value\n0,1\n1,1\n"), io::IoError);
  CHECK_THROWS_AS(io::parse_envelope_csv("t,omega\n0,1\n0.1,x\n"), io::IoError);
}

TEST_CASE("moment state CSV round trip") {
  MomentState m(3, 4, Eigen::VectorXd::LinSpaced(12, -1.0 / 3.0, 7.0 / 9.0));
  const MomentState back = io::parse_moment_state_csv(io::moment_state_csv(m));
  CHECK(back.order() == 3);
  CHECK(back.block_dim() == 4);
  CHECK(back.values() == m.values());
}

TEST_CASE("design result and square record JSON round trip") {
  const DesignResult r{PulseEnvelope(0.001, {1.0 / 3.0, 2.0}), {1.2, 0.7, 0.1 / 3.0}, 0.1 / 3.0, false, 2, 1e-8};
  const DesignResult back = io::design_result_from_json(json::parse(io::to_json(r).dump()));
  CHECK(back.envelope.values() == r.envelope.values());
  CHECK(back.envelope.dt() == r.envelope.dt());
  CHECK(back.residual_history == r.residual_history);
  CHECK(back.converged == r.converged);
  CHECK(back.iterations == 2);

  const io::SquareRecord s{{3.9865, 2.2849, 0.4744, 0.9427, 0.4181}, 1, 0.1, 3, 1e-3};
  const io::SquareRecord sb = io::square_record_from_json(json::parse(io::to_json(s).dump()));
  CHECK(sb.params.as_array() == s.params.as_array());
  CHECK(sb.m == 3);
  CHECK_THROWS_AS(io::square_record_from_json(json{{"omega1", 1.0}}), io::IoError);
}

TEST_CASE("artifacts load by kind") {
  const fs::path dir = scratch("artifacts");
  const PulseEnvelope env(0.01, {1.0, 2.0, 3.0});
  io::write_envelope_csv(dir / "env.csv", env);
  io::write_json(dir / "design.json", io::to_json(DesignResult{env, {1.0}, 1.0, true, 0, 0.01}));
  io::write_json(dir / "sq.json", io::to_json(io::SquareRecord{{1, 2, 0.1, 0.2, 0.3}, 1, 0.1, 1, 0.0}));
  CHECK_FALSE(io::load_artifact(dir / "env.csv").is_square());
  CHECK(io::load_artifact(dir / "env.csv").label == "env");
  CHECK_FALSE(io::load_artifact(dir / "design.json").is_square());
  CHECK(io::load_artifact(dir / "sq.json").is_square());
  CHECK_THROWS(io::load_artifact(dir / "missing.json"));
}

TEST_CASE("config defaults and overrides") {
  const RunConfig c = config_from_json({{"schema_version", 1}});
  CHECK(c.model.order == 20);
  CHECK(c.model.n_plus == 9);
  CHECK(c.model.n_plus_val == 24);
  CHECK(c.ocp.horizon == 3.0);
  CHECK(c.ocp.dt == 0.001);
  CHECK(c.ocp.omega_max == 100.0);
  CHECK(c.ocp.slew_max == 500.0);
  CHECK(c.ocp.initial_guess.offset == 2.5);
  const OcpConfig o = c.ocp_config();
  CHECK(o.steps() == 3000);

  const RunConfig d = config_from_json(
      {{"schema_version", 1}, {"target", {{"n", 3}}}, {"ocp", {{"omega_min", -100}, {"tolerance", "inf"}}}});
  CHECK(d.target_n == 3);
  CHECK(d.ocp_config().omega_min == -100.0);
  CHECK(std::isinf(*d.ocp.tolerance));
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(config_from_json(json::object()), ConfigError);
  CHECK_THROWS_WITH_AS(config_from_json({{"schema_version", 1}, {"model", {{"Nplus", 3}}}}),
                       doctest::Contains("unknown key"), ConfigError);
  CHECK_THROWS_WITH_AS(config_from_json({{"schema_version", 1}, {"target", {{"n", 12}}}}),
                       doctest::Contains("n_plus"), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"schema_version", 2}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"schema_version", 1}, {"ocp", {{"dt", "fast"}}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"schema_version", 1}, {"ocp", {{"dt", 0.0007}}}}), ConfigError);
}

TEST_CASE("config JSON round trip and shipped defaults") {
  RunConfig c = config_from_json({{"schema_version", 1},
                                  {"sweep", {{"cases", {{{"n", 1}, {"delta", 0.4}}}}, {"square_m", {1, 3, 10}}}}});
  const RunConfig back = config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(back.sweep.cases.size() == 1);
  CHECK(back.sweep.square_m.size() == 3);

  const RunConfig shipped = load_config(fs::path(BECSPLIT_SOURCE_DIR) / "configs" / "defaults.json");
  CHECK(shipped.ocp.horizon == 3.0);
  CHECK(shipped.ocp.dt == 0.001);
  CHECK(shipped.model.order == 20);
  CHECK(shipped.model.n_plus_val == 24);

  const RunConfig sweep = load_config(fs::path(BECSPLIT_SOURCE_DIR) / "configs" / "sweep_levels.json");
  CHECK(sweep.sweep.cases.size() == 5);
  CHECK(sweep.sweep.omega_min.size() == 2);
  CHECK(sweep.ocp.tolerance.has_value());
}
