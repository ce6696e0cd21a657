#include "cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char **argv) {
  using namespace lpbm::cli;
  CLI::App app{"Numerical experiments for L_p Minkowski problems and Brunn-Minkowski inequalities"};
  app.require_subcommand(1);
  std::string config_path, output;
  std::uint64_t seed = 0;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"solve", "solve det(Hess h + h I) = f h^(p-1)"},
      {"verify", "batch-check the L_p Minkowski and Brunn-Minkowski inequalities"},
      {"spectrum", "leading eigenvalues of the linearized operator"},
      {"continuation", "track a solution along f_t or along p"},
      {"probe", "multi-start uniqueness probe"},
      {"logsolve", "log-Minkowski problem for a cone-volume density"},
  };
  for (const auto &[name, help] : commands) {
    CLI::App *sub = app.add_subcommand(name, help);
    sub->add_option("config", config_path, "INI configuration file")->required();
    sub->add_option("-o,--output", output, "output directory (overrides run.output)");
    sub->add_option("-s,--seed", seed, "random seed (overrides run.seed)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    ExperimentConfig config = load_config(command, config_path);
    const CLI::App *sub = app.get_subcommand(command);
    if (sub->count("--output")) config.output = output;
    if (sub->count("--seed")) config.seed = seed;
    return run(config);
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const lpbm::SolverError &e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolverFailure;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverFailure;
  }
}
