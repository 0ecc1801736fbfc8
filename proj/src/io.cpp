#include "becsplit/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace becsplit::io {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::vector<double>> parse_csv_rows(const std::string& text, std::size_t columns,
                                                const std::string& header) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw IoError("expected CSV header '" + header + "', got '" + line + "'");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(field, &used));
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw IoError("bad number '" + field + "' in CSV line " + std::to_string(rows.size() + 2));
      }
    }
    if (row.size() != columns) {
      throw IoError("CSV line " + std::to_string(rows.size() + 2) + " has " +
                    std::to_string(row.size()) + " fields, expected " + std::to_string(columns));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename T>
T get(const json& j, const char* key) {
  if (!j.contains(key)) throw IoError(std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw IoError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

json to_json(const SquareRecord& r) {
  return {{"kind", "square"},   {"n", r.n},
          {"delta", r.delta},   {"m", r.m},
          {"omega1", r.params.omega1}, {"omega2", r.params.omega2},
          {"tau1", r.params.tau1},     {"tau2", r.params.tau2},
          {"tau3", r.params.tau3},     {"objective", r.objective}};
}

SquareRecord square_record_from_json(const json& j) {
  SquareRecord r;
  r.params = {get<double>(j, "omega1"), get<double>(j, "omega2"), get<double>(j, "tau1"),
              get<double>(j, "tau2"), get<double>(j, "tau3")};
  r.n = j.value("n", 1);
  r.delta = j.value("delta", 0.1);
  r.m = j.value("m", 1);
  r.objective = j.value("objective", 0.0);
  try {
    r.params.validate();
  } catch (const std::invalid_argument& e) {
    throw IoError(e.what());
  }
  return r;
}

std::string envelope_csv(const PulseEnvelope& env) {
  std::string out = "t,omega\n";
  const auto& v = env.values();
  for (std::size_t k = 0; k < v.size(); ++k) {
    out += num(static_cast<double>(k) * env.dt()) + "," + num(v[k]) + "\n";
  }
  out += num(static_cast<double>(v.size()) * env.dt()) + "," + num(v.back()) + "\n";
  return out;
}

PulseEnvelope parse_envelope_csv(const std::string& text) {
  const auto rows = parse_csv_rows(text, 2, "t,omega");
  if (rows.size() < 2) throw IoError("envelope CSV needs at least two rows");
  const double dt = rows[1][0] - rows[0][0];
  if (!(dt > 0.0)) throw IoError("envelope CSV times must increase");
  std::vector<double> values;
  values.reserve(rows.size() - 1);
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) values.push_back(rows[k][1]);
  return PulseEnvelope(dt, std::move(values));
}

void write_envelope_csv(const fs::path& path, const PulseEnvelope& env) {
  write_text(path, envelope_csv(env));
}

PulseEnvelope read_envelope_csv(const fs::path& path) { return parse_envelope_csv(read_text(path)); }

void write_trajectory_csv(const fs::path& path, double dt, const std::vector<RealState>& states) {
  if (states.empty()) throw IoError("empty trajectory");
  const auto levels = states.front().size() / 2;
  std::string out = "t";
  for (Eigen::Index j = 0; j < levels; ++j) out += ",p" + std::to_string(2 * j);
  out += "\n";
  for (std::size_t k = 0; k < states.size(); ++k) {
    const Eigen::VectorXd p = populations(states[k]);
    out += num(static_cast<double>(k) * dt);
    for (Eigen::Index j = 0; j < p.size(); ++j) out += "," + num(p(j));
    out += "\n";
  }
  write_text(path, out);
}

std::string moment_state_csv(const MomentState& m) {
  std::string out = "block,row,value\n";
  for (int k = 0; k < m.order(); ++k) {
    for (int r = 0; r < m.block_dim(); ++r) {
      out += std::to_string(k) + "," + std::to_string(r) + "," + num(m.block(k)(r)) + "\n";
    }
  }
  return out;
}

MomentState parse_moment_state_csv(const std::string& text) {
  const auto rows = parse_csv_rows(text, 3, "block,row,value");
  if (rows.empty()) throw IoError("moment state CSV has no rows");
  int order = 0;
  int dim = 0;
  for (const auto& r : rows) {
    order = std::max(order, static_cast<int>(r[0]) + 1);
    dim = std::max(dim, static_cast<int>(r[1]) + 1);
  }
  if (static_cast<std::size_t>(order) * dim != rows.size()) {
    throw IoError("moment state CSV is not a full block grid");
  }
  MomentState m(order, dim);
  for (const auto& r : rows) m.block(static_cast<int>(r[0]))(static_cast<int>(r[1])) = r[2];
  return m;
}

json to_json(const DesignResult& r) {
  return {{"kind", "moment-design"},
          {"dt", r.envelope.dt()},
          {"envelope", r.envelope.values()},
          {"residual_history", r.residual_history},
          {"terminal_residual", r.terminal_residual},
          {"converged", r.converged},
          {"iterations", r.iterations},
          {"final_lambda", r.final_lambda}};
}

DesignResult design_result_from_json(const json& j) {
  return {PulseEnvelope(get<double>(j, "dt"), get<std::vector<double>>(j, "envelope")),
          get<std::vector<double>>(j, "residual_history"),
          get<double>(j, "terminal_residual"),
          get<bool>(j, "converged"),
          get<int>(j, "iterations"),
          get<double>(j, "final_lambda")};
}

void write_residual_csv(const fs::path& path, const std::vector<double>& history) {
  std::string out = "iteration,residual\n";
  for (std::size_t i = 0; i < history.size(); ++i) out += std::to_string(i) + "," + num(history[i]) + "\n";
  write_text(path, out);
}

ControlArtifact load_artifact(const fs::path& path) {
  const std::string label = path.stem().string();
  if (path.extension() == ".csv") return {read_envelope_csv(path), label};
  const json j = read_json(path);
  if (j.contains("envelope")) return {design_result_from_json(j).envelope, label};
  return {square_record_from_json(j).params, label};
}

json to_json(const EvaluationReport& r) {
  return {{"label", r.label}, {"index_value", r.index_value}, {"n_plus_val", r.n_plus_val}};
}

void write_curve_csv(const fs::path& path, const std::vector<CurvePoint>& curve) {
  std::string out = "eps,error,fidelity\n";
  for (const auto& p : curve) out += num(p.eps) + "," + num(p.error) + "," + num(p.fidelity) + "\n";
  write_text(path, out);
}

void write_report(const fs::path& dir, const std::vector<EvaluationReport>& rows) {
  json table = json::array();
  std::string csv = "label,index_value\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    table.push_back(to_json(rows[i]));
    csv += rows[i].label + "," + num(rows[i].index_value) + "\n";
    write_curve_csv(dir / "curves" / (std::to_string(i) + "_" + rows[i].label + ".csv"), rows[i].curve);
  }
  write_json(dir / "report.json", table);
  write_text(dir / "report.csv", csv);
}

}  // namespace becsplit::io
