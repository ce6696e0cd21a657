#pragma once

#include "lpbm/solver.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace lpbm {

struct VerifyOptions {
  double tolerance = 1e-9;     // verdict: slack >= -tolerance
  double recheck_band = 1e-6;  // slacks in (-recheck_band, -tolerance) are recomputed
  double near_ball = 0.05;     // C^2 radius for the log-Minkowski precondition
  /// Test mode: multiplies every combination volume by this factor.
  double volume_fault = 1.0;
  /// Threads used by the batteries; reports do not depend on it.
  int workers = 1;
};

/// One lambda of a Brunn-Minkowski check. lhs/rhs/slack are for the bodies
/// rescaled to unit volume (rhs = 1); the raw fields are for the bodies as given.
struct InequalityRow {
  double lambda = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  double raw_volume = 0.0;
  double rhs_geometric = 0.0; // V(K)^(1-lambda) V(L)^lambda
  double rhs_pmean = 0.0;     // ((1-lambda) V(K)^(p/n) + lambda V(L)^(p/n))^(n/p)
  double slack_pmean = 0.0;   // raw_volume / rhs_pmean - 1
};

struct InequalityReport {
  std::string kind;
  std::string body_k;
  std::string body_l;
  double p = 0.0;
  double tolerance = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0; // worst slack over the report
  std::vector<InequalityRow> rows;
  bool power_mean_ordered = true;
  bool rechecked = false;
  bool holds = false;
};

/// (sum (h_L / h_K)^p dVbar_K)^(1/p) with the normalized cone measure of K.
double lp_minkowski_functional(const SupportField &hK, const SupportField &hL, double p);
double lp_minkowski_functional(const PolytopeBody &K, const PolytopeBody &L, double p);

/// lhs = functional on unit-volume copies, rhs = 1.
InequalityReport check_lp_minkowski(const PolytopeBody &K, const PolytopeBody &L, double p, const VerifyOptions &options = {});

/// Exact polytope L_p combinations on a lambda grid; both forms of the inequality.
InequalityReport check_lp_bm(const PolytopeBody &K, const PolytopeBody &L, double p, const std::vector<double> &lambdas,
                             const VerifyOptions &options = {});

/// Log-Minkowski form sum log(h_L/h_K) dVbar_K >= (1/n) log(V(L)/V(K)) plus
/// the geometric-mean combination on the lambda grid (grid-normal Wulff shapes).
InequalityReport check_log_bm(const SupportField &hK, const SupportField &hL, const std::vector<double> &lambdas,
                              const VerifyOptions &options = {});

using SupportFunction = std::function<double(const Eigen::VectorXd &)>;

/// As above from support functions; a slack in the recheck band is
/// recomputed on a grid of twice the resolution.
InequalityReport check_log_bm(const GridPtr &grid, const SupportFunction &hK, const SupportFunction &hL,
                              const std::vector<double> &lambdas, const VerifyOptions &options = {});

/// h / V^(1/n) with V the discrete volume (1/n) sum h dS.
SupportField normalize_volume(const SupportField &h);

struct VariationalOptions {
  double tolerance = 1e-7; // optimality residual (densities, sup norm)
  int max_iterations = 5000;
  int max_halvings = 60;
};

struct VariationalReport {
  SupportField minimizer;
  double objective = 0.0;
  double objective_start = 0.0;
  double objective_at_k = 0.0;
  double optimality_residual = 0.0;
  /// sup |grad F - mu grad V| / (|mu| w) for the discrete problem; equals the
  /// optimality residual up to the factor det W scaling when n = 2.
  double stationarity = 0.0;
  double volume = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;
  std::string message;
};

/// min sum (h_L/h_K)^p dV_K over even fields with V(L) = 1 (V(K) must be 1).
/// Sobolev-preconditioned projected gradient with Armijo backtracking and
/// volume renormalization; the residual is sup |det W_L - h_L^(p-1) h_K^(1-p) det W_K|.
/// Stops when the optimality residual or the discrete stationarity drops
/// below tolerance; throws std::runtime_error when the descent stalls.
/// Validated for n = 2; on n = 3 grids the discrete objective can fall below
/// its value at K, so prefer solve_lp_minkowski there.
VariationalReport variational_minimize(const SupportField &hK, double p, const VariationalOptions &options = {});

/// min sum log h_L dV_K with V(L) = 1; residual sup |h_L det W_L - h_K det W_K| / n.
VariationalReport log_variational_minimize(const SupportField &hK, const VariationalOptions &options = {});

/// det(Hess h + h I) = n f / h: f is the cone-volume density.
SolveReport solve_log_minkowski(const GridPtr &grid, const Eigen::Ref<const Eigen::VectorXd> &f,
                                const std::optional<SupportField> &init = std::nullopt, const SolverOptions &options = {});

/// conv(+-x_i) for 3..8 (n=2) or 4..10 (n=3) Gaussian points.
PolytopeBody random_symmetric_polytope(int dim, std::mt19937_64 &rng);

/// Randomly rotated ellipsoid (radii in [0.5, 2]) times a smooth even
/// perturbation, kept convex-admissible.
SupportField random_smooth_body(const GridPtr &grid, std::mt19937_64 &rng);

/// 1 + Y with Y even and C^2 distance to the ball exactly `radius`.
SupportField near_ball_body(const GridPtr &grid, double radius, std::mt19937_64 &rng);

/// Batch line: pair id, p, lambda, lhs, rhs, slack, verdict.
struct BatchRow {
  int pair = 0;
  std::string kind;
  double p = 0.0;
  double lambda = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool holds = true;
};

struct BatchSummary {
  std::uint64_t seed = 0;
  int pairs = 0;
  int checks = 0;
  int violations = 0;
  int rechecks = 0;
  double worst_slack = 0.0;
  std::vector<BatchRow> rows;
};

/// Random polytope pairs: L_p-Minkowski and L_p-BM checks for every p.
/// With identical_pairs, L = K.
BatchSummary polytope_battery(int dim, int pairs, const std::vector<double> &p_list, const std::vector<double> &lambdas,
                              std::uint64_t seed, const VerifyOptions &options = {}, bool identical_pairs = false);

/// One near-ball K (C^2 radius options.near_ball) against random smooth L.
BatchSummary log_battery(const GridPtr &grid, int pairs, const std::vector<double> &lambdas, std::uint64_t seed,
                         const VerifyOptions &options = {});

} // namespace lpbm
