#include "becsplit/commands.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "becsplit/evaluation.hpp"
#include "becsplit/io.hpp"
#include "becsplit/moment_ocp.hpp"
#include "becsplit/square_pulse.hpp"

namespace becsplit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Writes every line to the caller's stream and to run.log.
class RunLog {
 public:
  RunLog(const fs::path& dir, std::ostream& echo) : echo_(echo) {
    fs::create_directories(dir);
    file_.open(dir / "run.log", std::ios::app);
  }

  void line(const std::string& s) {
    std::lock_guard lock(mu_);
    echo_ << s << '\n';
    echo_.flush();
    file_ << s << '\n';
    file_.flush();
  }

 private:
  std::ostream& echo_;
  std::ofstream file_;
  std::mutex mu_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

void snapshot(const RunConfig& cfg, const fs::path& dir) { io::write_json(dir / "config.json", to_json(cfg)); }

std::string square_label(int m) { return m == 1 ? "sp" : "sp" + std::to_string(m); }
std::string moment_label(double omega_min) { return omega_min >= 0.0 ? "md_pos" : "md_real"; }

struct SquareRun {
  io::SquareRecord record;
  bool success = false;
};

SquareRun run_square(const RunConfig& cfg, int n, double delta, int m, RunLog& log) {
  const TargetSpec target(n, cfg.model.n_plus_val);
  const SampledEnsembleSpec ens(delta, m);
  const auto t0 = std::chrono::steady_clock::now();
  const SquareDesign d = optimize_square(target, ens, cfg.square_bounds(), cfg.square_options());
  log.line("square n=" + std::to_string(n) + " delta=" + fmt(delta) + " m=" + std::to_string(m) +
           " objective=" + fmt(d.objective) + " evaluations=" + std::to_string(d.evaluations) +
           " runtime_s=" + fmt(seconds_since(t0)));
  return {{d.params, n, delta, m, d.objective}, d.success};
}

DesignResult run_moment(const OcpConfig& ocp, RunLog& log, const std::string& tag) {
  const auto t0 = std::chrono::steady_clock::now();
  DesignResult r = design_pulse(ocp, [&](int it, double res, double lambda) {
    log.line(tag + " iteration " + std::to_string(it) + " residual=" + fmt(res) + " lambda=" + fmt(lambda));
  });
  for (double u : r.envelope.values()) {
    if (!std::isfinite(u)) throw std::runtime_error("design produced a non-finite control");
  }
  if (!std::isfinite(r.terminal_residual)) throw std::runtime_error("design residual is not finite");
  log.line(tag + " done converged=" + std::string(r.converged ? "true" : "false") +
           " iterations=" + std::to_string(r.iterations) + " residual=" + fmt(r.terminal_residual) +
           " runtime_s=" + fmt(seconds_since(t0)));
  return r;
}

void write_design(const fs::path& dir, const std::string& stem, const DesignResult& r,
                  const OutputSection& out) {
  if (out.json) io::write_json(dir / (stem + ".json"), io::to_json(r));
  if (out.csv) {
    io::write_envelope_csv(dir / (stem + "_envelope.csv"), r.envelope);
    io::write_residual_csv(dir / (stem + "_residuals.csv"), r.residual_history);
  }
}

void write_square(const fs::path& dir, const std::string& stem, const io::SquareRecord& rec,
                  double dt, const OutputSection& out) {
  // The params JSON is what evaluate reads back, so it is always written.
  io::write_json(dir / (stem + ".json"), io::to_json(rec));
  if (out.csv) io::write_envelope_csv(dir / (stem + "_envelope.csv"), render_square_sequence(rec.params, dt));
}

}  // namespace

int cmd_design_square(const RunConfig& cfg, const fs::path& out_dir, std::ostream& echo) {
  RunLog log(out_dir, echo);
  snapshot(cfg, out_dir);
  const SquareRun run = run_square(cfg, cfg.target_n, cfg.model.delta, cfg.square.m, log);
  write_square(out_dir, "square", run.record, cfg.ocp.dt, cfg.output);
  if (!run.success) {
    log.line("square design failed: objective " + fmt(run.record.objective) + " above threshold " +
             fmt(cfg.square.failure_threshold));
    return kExitNonConvergence;
  }
  return kExitOk;
}

int cmd_design_moment(const RunConfig& cfg, const fs::path& out_dir, std::ostream& echo) {
  RunLog log(out_dir, echo);
  snapshot(cfg, out_dir);
  const DesignResult r = run_moment(cfg.ocp_config(), log, "design");
  write_design(out_dir, "design", r, cfg.output);
  return r.converged ? kExitOk : kExitNonConvergence;
}

int cmd_evaluate(const RunConfig& cfg, const std::vector<std::string>& artifacts,
                 const fs::path& out_dir, std::ostream& echo) {
  std::vector<std::string> paths = cfg.evaluate.artifacts;
  paths.insert(paths.end(), artifacts.begin(), artifacts.end());
  if (paths.empty()) throw ConfigError("evaluate needs at least one artifact");
  std::vector<ControlArtifact> loaded;
  for (const auto& p : paths) {
    try {
      loaded.push_back(io::load_artifact(p));
    } catch (const std::exception& e) {
      throw ConfigError("cannot load artifact " + p + ": " + e.what());
    }
  }
  RunLog log(out_dir, echo);
  snapshot(cfg, out_dir);
  const TargetSpec target = cfg.validation_target();
  const QuadratureRule rule = gauss_legendre(cfg.evaluate.quadrature_nodes);
  std::vector<EvaluationReport> rows;
  for (const auto& a : loaded) {
    rows.push_back({a.label, performance_index(a, cfg.model.delta, target, rule),
                    fidelity_curve(a, cfg.model.delta, target, cfg.evaluate.curve_points),
                    target.n_plus});
    log.line(a.label + " I_e=" + fmt(rows.back().index_value));
  }
  io::write_report(out_dir, rows);
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, const fs::path& out_dir, int workers, std::ostream& echo) {
  if (cfg.sweep.cases.empty()) throw ConfigError("sweep.cases is empty");
  if (workers < 1) throw ConfigError("--workers must be >= 1");
  RunLog log(out_dir, echo);
  snapshot(cfg, out_dir);

  struct CaseResult {
    std::vector<std::pair<std::string, double>> indices;
    std::string error;
    bool converged = true;
  };
  const auto& cases = cfg.sweep.cases;
  std::vector<CaseResult> results(cases.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
#ifdef _OPENMP
    omp_set_num_threads(std::max(1, omp_get_num_procs() / workers));
#endif
    for (std::size_t i = next++; i < cases.size(); i = next++) {
      const SweepCase& sc = cases[i];
      const std::string name = "case" + std::to_string(i) + "_n" + std::to_string(sc.n) + "_delta" + fmt(sc.delta);
      const fs::path dir = out_dir / name;
      CaseResult& res = results[i];
      try {
        fs::create_directories(dir);
        const TargetSpec target(sc.n, cfg.model.n_plus_val);
        const QuadratureRule rule = gauss_legendre(cfg.evaluate.quadrature_nodes);
        std::vector<ControlArtifact> artifacts;
        for (int m : cfg.sweep.square_m) {
          const SquareRun run = run_square(cfg, sc.n, sc.delta, m, log);
          write_square(dir, square_label(m), run.record, cfg.ocp.dt, cfg.output);
          artifacts.push_back({run.record.params, square_label(m)});
        }
        for (double lo : cfg.sweep.omega_min) {
          const std::string label = moment_label(lo);
          const DesignResult r = run_moment(cfg.ocp_config(sc.n, sc.delta, lo), log, name + " " + label);
          write_design(dir, label, r, cfg.output);
          res.converged = res.converged && r.converged;
          artifacts.push_back({r.envelope, label});
        }
        std::vector<EvaluationReport> rows;
        for (const auto& a : artifacts) {
          rows.push_back({a.label, performance_index(a, sc.delta, target, rule),
                          fidelity_curve(a, sc.delta, target, cfg.evaluate.curve_points),
                          target.n_plus});
          res.indices.emplace_back(a.label, rows.back().index_value);
        }
        io::write_report(dir, rows);
        log.line(name + " finished");
      } catch (const std::exception& e) {
        res.error = e.what();
        log.line(name + " failed: " + res.error);
      }
    }
  };
  std::vector<std::thread> pool;
  const int threads = std::min<int>(workers, static_cast<int>(cases.size()));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::vector<std::string> labels;
  for (int m : cfg.sweep.square_m) labels.push_back(square_label(m));
  for (double lo : cfg.sweep.omega_min) labels.push_back(moment_label(lo));

  json summary = json::array();
  std::string csv = "n,delta";
  for (const auto& l : labels) csv += ",I_e_" + l;
  csv += ",status\n";
  bool any_failed = false;
  bool all_converged = true;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& r = results[i];
    json row = {{"n", cases[i].n}, {"delta", cases[i].delta}};
    std::ostringstream line;
    line.precision(17);
    line << cases[i].n << ',' << cases[i].delta;
    for (std::size_t k = 0; k < labels.size(); ++k) {
      if (k < r.indices.size()) {
        row["I_e_" + labels[k]] = r.indices[k].second;
        line << ',' << r.indices[k].second;
      } else {
        line << ',';
      }
    }
    const std::string status = !r.error.empty() ? "failed" : (r.converged ? "ok" : "not-converged");
    row["status"] = status;
    if (!r.error.empty()) row["error"] = r.error;
    line << ',' << status << '\n';
    csv += line.str();
    summary.push_back(row);
    any_failed = any_failed || !r.error.empty();
    all_converged = all_converged && r.converged;
  }
  io::write_json(out_dir / "summary.json", summary);
  io::write_text(out_dir / "summary.csv", csv);
  if (any_failed) return kExitNumericalFailure;
  return all_converged ? kExitOk : kExitNonConvergence;
}

int run_command(const std::string& command, const CliOptions& options, std::ostream& log) {
  try {
    RunConfig cfg = options.config.empty() ? config_from_json({{"schema_version", kConfigSchemaVersion}})
                                           : load_config(options.config);
    if (options.seed) cfg.ocp.seed = *options.seed;
    const fs::path out = options.out ? *options.out : fs::path(cfg.output.directory) / command;
    if (command == "design-square") return cmd_design_square(cfg, out, log);
    if (command == "design-moment") return cmd_design_moment(cfg, out, log);
    if (command == "evaluate") return cmd_evaluate(cfg, options.artifacts, out, log);
    if (command == "sweep") return cmd_sweep(cfg, out, options.workers, log);
    throw ConfigError("unknown command '" + command + "'");
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    log << "numerical failure: " << e.what() << '\n';
    return kExitNumericalFailure;
  }
}

}  // namespace becsplit
