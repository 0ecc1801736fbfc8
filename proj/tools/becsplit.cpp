#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "becsplit/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Ensemble-robust beam splitter pulse design"};
  app.require_subcommand(1, 1);

  becsplit::CliOptions opts;
  std::string config;
  std::string out;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Run directory");
    sub->add_option("--seed", seed, "Random seed for square-pulse restarts");
    sub->add_option("--workers", opts.workers, "Sweep worker threads")->check(CLI::PositiveNumber);
  };
  for (const char* name : {"design-square", "design-moment", "sweep"}) {
    add_common(app.add_subcommand(name));
  }
  CLI::App* eval = app.add_subcommand("evaluate", "Compute I_e and fidelity curves for artifacts");
  add_common(eval);
  eval->add_option("artifacts", opts.artifacts, "Square-parameter JSON, design JSON or envelope CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : becsplit::kExitConfigError;
  }

  CLI::App* sub = app.get_subcommands().front();
  opts.config = config;
  if (!out.empty()) opts.out = out;
  if (sub->count("--seed") > 0) opts.seed = seed;
  return becsplit::run_command(sub->get_name(), opts, std::cerr);
}
