#include "becsplit/config.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "becsplit/io.hpp"

namespace becsplit {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("invalid config: " + what);
}

}  // namespace

void RunConfig::validate() const {
  require(schema_version == kConfigSchemaVersion,
          "schema_version must be " + std::to_string(kConfigSchemaVersion));
  require(model.order >= 1, "model.N must be >= 1");
  require(model.n_plus >= 1, "model.n_plus must be >= 1");
  require(model.n_plus_val >= model.n_plus, "model.n_plus_val must be >= model.n_plus");
  require(model.delta > 0.0 && model.delta < 1.0, "model.delta must lie in (0, 1)");
  require(target_n >= 1 && target_n <= model.n_plus, "target.n must satisfy 1 <= n <= n_plus");
  require(square.m >= 1, "square.m must be >= 1");
  require(square.restarts >= 1, "square.restarts must be >= 1");
  require(square.max_evaluations >= 1, "square.max_evaluations must be >= 1");
  require(square.omega_max > 0.0 && square.tau_max > 0.0, "square bounds must be positive");
  require(evaluate.quadrature_nodes >= 1, "evaluate.quadrature_nodes must be >= 1");
  require(evaluate.curve_points >= 2, "evaluate.curve_points must be >= 2");
  for (const auto& c : sweep.cases) {
    require(c.n >= 1 && c.n <= model.n_plus, "sweep case n must satisfy 1 <= n <= n_plus");
    require(c.delta > 0.0 && c.delta < 1.0, "sweep case delta must lie in (0, 1)");
  }
  for (int m : sweep.square_m) require(m >= 1, "sweep.square_m entries must be >= 1");
  try {
    ocp_config().validate();
    for (double lo : sweep.omega_min) ocp_config(target_n, model.delta, lo).validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

OcpConfig RunConfig::ocp_config() const { return ocp_config(target_n, model.delta, ocp.omega_min); }

OcpConfig RunConfig::ocp_config(int n, double delta, double omega_min) const {
  OcpConfig c;
  c.n = n;
  c.delta = delta;
  c.order = model.order;
  c.n_plus = model.n_plus;
  c.horizon = ocp.horizon;
  c.dt = ocp.dt;
  c.omega_min = omega_min;
  c.omega_max = ocp.omega_max;
  c.slew_min = ocp.slew_min;
  c.slew_max = ocp.slew_max;
  c.lambda = ocp.lambda;
  c.lambda_max = ocp.lambda_max;
  c.tolerance = ocp.tolerance;
  c.max_iters = ocp.max_iters;
  c.initial_guess = ocp.initial_guess;
  c.coarsen = ocp.coarsen;
  c.qp_tol = ocp.qp_tol;
  c.qp_max_iters = ocp.qp_max_iters;
  return c;
}

SquareBounds RunConfig::square_bounds() const {
  SquareBounds b;
  b.upper = {square.omega_max, square.omega_max, square.tau_max, square.tau_max, square.tau_max};
  return b;
}

SquareOptimizerOptions RunConfig::square_options() const {
  SquareOptimizerOptions o;
  o.restarts = square.restarts;
  o.seed = ocp.seed;
  o.max_evaluations = square.max_evaluations;
  o.failure_threshold = square.failure_threshold;
  return o;
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  check_keys(j, "config",
             {"schema_version", "model", "target", "ocp", "square", "evaluate", "sweep", "output"});
  if (!j.contains("schema_version")) throw ConfigError("config is missing schema_version");
  read(j, "schema_version", c.schema_version, "config");

  if (j.contains("model")) {
    const json& s = j["model"];
    check_keys(s, "model", {"N", "n_plus", "n_plus_val", "delta"});
    read(s, "N", c.model.order, "model");
    read(s, "n_plus", c.model.n_plus, "model");
    read(s, "n_plus_val", c.model.n_plus_val, "model");
    read(s, "delta", c.model.delta, "model");
  }
  if (j.contains("target")) {
    check_keys(j["target"], "target", {"n"});
    read(j["target"], "n", c.target_n, "target");
  }
  if (j.contains("ocp")) {
    const json& s = j["ocp"];
    check_keys(s, "ocp",
               {"T", "dt", "omega_min", "omega_max", "slew_min", "slew_max", "lambda", "lambda_max",
                "tolerance", "max_iters", "coarsen", "qp_tol", "qp_max_iters", "initial_guess",
                "seed"});
    auto& o = c.ocp;
    read(s, "T", o.horizon, "ocp");
    read(s, "dt", o.dt, "ocp");
    read(s, "omega_min", o.omega_min, "ocp");
    read(s, "omega_max", o.omega_max, "ocp");
    read(s, "slew_min", o.slew_min, "ocp");
    read(s, "slew_max", o.slew_max, "ocp");
    read(s, "lambda", o.lambda, "ocp");
    read(s, "lambda_max", o.lambda_max, "ocp");
    if (s.contains("tolerance")) {
      const json& t = s["tolerance"];
      if (t.is_null()) {
        o.tolerance.reset();
      } else if (t.is_string() && (t == "inf" || t == "infinity")) {
        o.tolerance = std::numeric_limits<double>::infinity();
      } else if (t.is_number()) {
        o.tolerance = t.get<double>();
      } else {
        throw ConfigError("ocp.tolerance must be a number, \"inf\" or null");
      }
    }
    read(s, "max_iters", o.max_iters, "ocp");
    read(s, "coarsen", o.coarsen, "ocp");
    read(s, "qp_tol", o.qp_tol, "ocp");
    read(s, "qp_max_iters", o.qp_max_iters, "ocp");
    read(s, "seed", o.seed, "ocp");
    if (s.contains("initial_guess")) {
      const json& g = s["initial_guess"];
      check_keys(g, "ocp.initial_guess", {"offset", "amplitude", "frequency", "values"});
      read(g, "offset", o.initial_guess.offset, "ocp.initial_guess");
      read(g, "amplitude", o.initial_guess.amplitude, "ocp.initial_guess");
      read(g, "frequency", o.initial_guess.frequency, "ocp.initial_guess");
      if (g.contains("values")) {
        std::vector<double> v;
        read(g, "values", v, "ocp.initial_guess");
        o.initial_guess.values = std::move(v);
      }
    }
  }
  if (j.contains("square")) {
    const json& s = j["square"];
    check_keys(s, "square",
               {"m", "restarts", "max_evaluations", "omega_max", "tau_max", "failure_threshold"});
    read(s, "m", c.square.m, "square");
    read(s, "restarts", c.square.restarts, "square");
    read(s, "max_evaluations", c.square.max_evaluations, "square");
    read(s, "omega_max", c.square.omega_max, "square");
    read(s, "tau_max", c.square.tau_max, "square");
    read(s, "failure_threshold", c.square.failure_threshold, "square");
  }
  if (j.contains("evaluate")) {
    const json& s = j["evaluate"];
    check_keys(s, "evaluate", {"quadrature_nodes", "curve_points", "artifacts"});
    read(s, "quadrature_nodes", c.evaluate.quadrature_nodes, "evaluate");
    read(s, "curve_points", c.evaluate.curve_points, "evaluate");
    read(s, "artifacts", c.evaluate.artifacts, "evaluate");
  }
  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    check_keys(s, "sweep", {"cases", "omega_min", "square_m"});
    if (s.contains("cases")) {
      if (!s["cases"].is_array()) throw ConfigError("sweep.cases must be an array");
      for (const json& e : s["cases"]) {
        check_keys(e, "sweep.cases[]", {"n", "delta"});
        SweepCase sc;
        read(e, "n", sc.n, "sweep.cases[]");
        read(e, "delta", sc.delta, "sweep.cases[]");
        c.sweep.cases.push_back(sc);
      }
    }
    read(s, "omega_min", c.sweep.omega_min, "sweep");
    read(s, "square_m", c.sweep.square_m, "sweep");
  }
  if (j.contains("output")) {
    const json& s = j["output"];
    check_keys(s, "output", {"directory", "formats"});
    read(s, "directory", c.output.directory, "output");
    if (s.contains("formats")) {
      std::vector<std::string> formats;
      read(s, "formats", formats, "output");
      c.output.csv = c.output.json = false;
      for (const auto& f : formats) {
        if (f == "csv") c.output.csv = true;
        else if (f == "json") c.output.json = true;
        else throw ConfigError("unknown output format '" + f + "'");
      }
    }
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const RunConfig& c) {
  json guess = {{"offset", c.ocp.initial_guess.offset},
                {"amplitude", c.ocp.initial_guess.amplitude},
                {"frequency", c.ocp.initial_guess.frequency}};
  if (c.ocp.initial_guess.values) guess["values"] = *c.ocp.initial_guess.values;
  json tolerance = nullptr;
  if (c.ocp.tolerance) {
    tolerance = std::isinf(*c.ocp.tolerance) ? json("inf") : json(*c.ocp.tolerance);
  }
  json cases = json::array();
  for (const auto& sc : c.sweep.cases) cases.push_back({{"n", sc.n}, {"delta", sc.delta}});
  json formats = json::array();
  if (c.output.csv) formats.push_back("csv");
  if (c.output.json) formats.push_back("json");
  return {
      {"schema_version", c.schema_version},
      {"model",
       {{"N", c.model.order}, {"n_plus", c.model.n_plus}, {"n_plus_val", c.model.n_plus_val},
        {"delta", c.model.delta}}},
      {"target", {{"n", c.target_n}}},
      {"ocp",
       {{"T", c.ocp.horizon}, {"dt", c.ocp.dt}, {"omega_min", c.ocp.omega_min},
        {"omega_max", c.ocp.omega_max}, {"slew_min", c.ocp.slew_min}, {"slew_max", c.ocp.slew_max},
        {"lambda", c.ocp.lambda}, {"lambda_max", c.ocp.lambda_max}, {"tolerance", tolerance},
        {"max_iters", c.ocp.max_iters}, {"coarsen", c.ocp.coarsen}, {"qp_tol", c.ocp.qp_tol},
        {"qp_max_iters", c.ocp.qp_max_iters}, {"initial_guess", guess}, {"seed", c.ocp.seed}}},
      {"square",
       {{"m", c.square.m}, {"restarts", c.square.restarts},
        {"max_evaluations", c.square.max_evaluations}, {"omega_max", c.square.omega_max},
        {"tau_max", c.square.tau_max}, {"failure_threshold", c.square.failure_threshold}}},
      {"evaluate",
       {{"quadrature_nodes", c.evaluate.quadrature_nodes},
        {"curve_points", c.evaluate.curve_points}, {"artifacts", c.evaluate.artifacts}}},
      {"sweep", {{"cases", cases}, {"omega_min", c.sweep.omega_min}, {"square_m", c.sweep.square_m}}},
      {"output", {{"directory", c.output.directory}, {"formats", formats}}}};
}

RunConfig load_config(const std::filesystem::path& path) {
  json j;
  try {
    j = io::read_json(path);
  } catch (const io::IoError& e) {
    throw ConfigError(e.what());
  }
  return config_from_json(j);
}

}  // namespace becsplit
