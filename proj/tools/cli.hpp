#pragma once

#include "lpbm/io.hpp"

#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace lpbm::cli {

enum ExitCode { kOk = 0, kConfigError = 1, kSolverFailure = 2, kViolations = 3 };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parsed INI configuration: [grid], [problem], [solver], [run] and one
/// section per command. Unknown sections or keys are rejected.
struct ExperimentConfig {
  std::string command;
  int n = 2;
  int resolution = 0;
  double p = 0.8;
  std::vector<double> p_list;
  std::string density = "constant:1";
  std::uint64_t seed = 0;
  int workers = 1;
  SolverOptions solver;
  std::filesystem::path output = ".";
  boost::property_tree::ptree tree;

  /// Typed access to the command's own section.
  template <class T> T get(const std::string &key, const T &fallback) const;
  std::vector<double> get_list(const std::string &key, const std::vector<double> &fallback) const;
};

ExperimentConfig parse_config(const std::string &command, std::istream &in);
ExperimentConfig load_config(const std::string &command, const std::filesystem::path &path);

/// Density on the grid with an optional exact solution (manufactured data).
/// `cone_volume` selects the log-Minkowski reading of manufactured data.
struct Density {
  Eigen::VectorXd values;
  std::optional<SupportField> exact;
};
Density parse_density(const std::string &spec, const GridPtr &grid, double p, bool cone_volume = false);

/// Runs one subcommand and writes its artifacts; returns the exit code.
int run(const ExperimentConfig &config);

} // namespace lpbm::cli
