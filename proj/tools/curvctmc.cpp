#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "curvctmc/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Curvature bounds and deviation inequalities for birth-death chains"};
  app.require_subcommand(1);

  struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> paths;
    std::optional<std::string> out;
  };
  Options opts;

  const std::pair<const char*, const char*> commands[] = {
      {"curvature", "Curvature certificates and empirical estimates"},
      {"bound", "Evaluate deviation bounds on a y grid"},
      {"tail", "Monte Carlo tail estimate against the analytic bounds"},
      {"verify", "Run the acceptance suite"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opts.config, "JSON experiment config")->required();
    sub->add_option("--seed", opts.seed, "Random seed (overrides the config)");
    sub->add_option("--paths", opts.paths, "Number of Monte Carlo paths (overrides the config)");
    sub->add_option("--out", opts.out, "Output directory (overrides the config)");
  }
  app.footer(
      "Exit status: 0 all checks pass, 1 an inequality is violated, 2 invalid config.\n"
      "Results go to <out>/<run-id>/ where run-id hashes the config and seed.");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return curvctmc::kExitConfig;
  }

  curvctmc::CliOverrides overrides;
  overrides.seed = opts.seed;
  overrides.paths = opts.paths;
  if (opts.out) overrides.out = *opts.out;
  const std::string command = app.get_subcommands().front()->get_name();
  return curvctmc::run_command(command, opts.config, overrides, std::cout, std::cerr);
}
