#pragma once

#include "lpbm/solver.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace lpbm {

/// Solutions along a one-parameter family (t in [0,1] or a list of p).
struct ContinuationTrace {
  std::string parameter;          // "t" or "p"
  double p = 0.0;                 // fixed exponent for t-paths
  std::vector<double> values;     // parameter values actually solved
  std::vector<SupportField> solutions;
  std::vector<double> residual;
  std::vector<double> sigma_min;  // of L + (1 - p) at each solution
  std::vector<double> step_distance; // sup |h_k - h_{k-1}|, 0 for the first entry
  std::vector<int> iterations;
  bool completed = false;
  double last_good = 0.0;
  std::string message;
};

struct ContinuationOptions {
  SolverOptions solver;
  int max_bisections = 3;
};

/// Tracks f_t = (1 - t) + t f1 on a uniform t-grid with `steps` intervals,
/// bisecting a failed interval up to max_bisections times before giving up.
ContinuationTrace continuation_run(const GridPtr &grid, const Eigen::Ref<const Eigen::VectorXd> &f1, double p, int steps,
                                   const ContinuationOptions &options = {});

/// Warm-started solves over a strictly decreasing list of p in [0,1).
ContinuationTrace p_sweep(const GridPtr &grid, const Eigen::Ref<const Eigen::VectorXd> &f, const std::vector<double> &p_list,
                          const ContinuationOptions &options = {});

struct ProbeOptions {
  SolverOptions solver;
  double delta_cluster = 1e-4;
  double amplitude = 0.3; // upper bound of the start perturbation
  int max_degree = 6;     // even harmonic degree of the perturbation
};

struct ClusterReport {
  std::uint64_t seed = 0;
  int n_starts = 0;
  std::vector<SupportField> starts;
  std::vector<bool> converged;
  std::vector<std::string> failures; // empty string for converged starts
  std::vector<int> converged_index;  // start index of each converged solution
  std::vector<SupportField> solutions;
  Eigen::MatrixXd distances;         // pairwise sup distance between solutions
  double delta_cluster = 0.0;
  std::vector<int> cluster_of;       // per converged solution
  std::vector<int> representatives;  // position in `solutions` of each cluster's first member
  int cluster_count() const { return static_cast<int>(representatives.size()); }
};

/// Random degree-d homogeneous polynomial (d even) sampled on the grid,
/// scaled to sup |Y| = 1. Its restriction is an even combination of
/// harmonics of degree <= d.
Eigen::VectorXd random_even_polynomial(const SphereGrid &grid, int degree, std::mt19937_64 &rng);

/// Random even start of the form c (1 + eps Y), Y a degree-6 homogeneous
/// polynomial with sup |Y| = 1, eps <= amplitude halved until admissible.
SupportField random_even_start(const GridPtr &grid, double c, double amplitude, int max_degree, std::mt19937_64 &rng);

/// Multi-start solves clustered by single linkage at delta_cluster.
/// Throws std::runtime_error when no start converges.
ClusterReport multiplicity_probe(const GridPtr &grid, const Eigen::Ref<const Eigen::VectorXd> &f, double p, int n_starts,
                                 std::uint64_t seed, const ProbeOptions &options = {});

/// Single-linkage clusters of a distance matrix at threshold delta.
std::vector<int> cluster_labels(const Eigen::Ref<const Eigen::MatrixXd> &distances, double delta);

} // namespace lpbm
