#pragma once

#include "lpbm/bodies.hpp"
#include "lpbm/stencil.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace lpbm {

struct SolverOptions {
  double tolerance = 0.0; // 0: 1e-10 for n = 2, 1e-7 for n = 3
  int max_iterations = 200;
  int max_halvings = 20;
  /// Newton systems with a smaller singular value are reported as singular.
  double singular_threshold = 1e-12;
  /// Estimate sigma_min of the Newton matrix at every iteration.
  bool track_sigma = true;
};

double default_tolerance(int ambient_dim);

struct IterationRecord {
  int iteration = 0;
  double residual_sup = 0.0;
  double damping = 0.0;
  double margin = 0.0;
  double sigma_min = 0.0;
};

struct SolveReport {
  SupportField solution;
  double p = 0.0;
  bool converged = false;
  double residual_sup = 0.0;
  double tolerance = 0.0;
  int iterations = 0;
  std::vector<IterationRecord> trace; // row 0 is the initial state
  double convexity_margin = 0.0;
  /// Smallest singular value of L + (1 - p) at the solution, in L^2(grid).
  double sigma_min = 0.0;
  double wall_seconds = 0.0;
  std::string message;
};

/// Newton failure modes; `report` holds the state at the point of failure.
struct SolverError : std::runtime_error {
  enum class Kind { NonConvergence, ConvexityCollapse, Singular, LineSearch, Barycenter };
  Kind kind;
  std::shared_ptr<const SolveReport> report;
  SolverError(Kind k, const std::string &what, std::shared_ptr<const SolveReport> r = nullptr)
      : std::runtime_error(what), kind(k), report(std::move(r)) {}
};

const char *to_string(SolverError::Kind kind);

/// R_i = det(Hess h + h I)(x_i) - f_i h_i^(p-1).
Eigen::VectorXd residual(const SupportField &h, const Eigen::Ref<const Eigen::VectorXd> &f, double p);

struct StepResult {
  SupportField h;
  double residual_before = 0.0;
  double residual_after = 0.0;
  double damping = 0.0;
  double margin = 0.0;
  double sigma_min = 0.0; // of the Newton matrix (pair coordinates); NaN if not tracked
};

/// One damped Newton step on the even subspace.
StepResult newton_step(const SupportField &h, const Eigen::Ref<const Eigen::VectorXd> &f, double p,
                       const SolverOptions &options = {});

/// det(Hess h + h I) = f h^(p-1) for 0 <= p < 1; default start is the
/// constant (mean f)^(1/(n-p)).
SolveReport solve_lp_minkowski(const GridPtr &grid, const Eigen::Ref<const Eigen::VectorXd> &f, double p,
                               const std::optional<SupportField> &init = std::nullopt,
                               const SolverOptions &options = {});

/// det(Hess v + v I) = rho (p = 1). Rejects data that is not even.
SolveReport solve_classical_minkowski(const GridPtr &grid, const Eigen::Ref<const Eigen::VectorXd> &rho,
                                      const std::optional<SupportField> &init = std::nullopt,
                                      const SolverOptions &options = {});

/// v with det(Hess v + v I) = f_t h^((1-t) p_tilde + t p - 1), where
/// f_t = (1-t) f_0 + t f and f_0 = det(Hess h_L + h_L I) h_L^(1-p_tilde).
SupportField apply_map_A(const SupportField &h, double t, const Eigen::Ref<const Eigen::VectorXd> &f, double p,
                         double p_tilde, const SupportField &hL, const SolverOptions &options = {});

/// L phi = h_L tr(W^-1 W_phi) on pair coordinates.
SparseRowMatrix linearized_operator_sparse(const SupportField &hL);
Eigen::MatrixXd linearized_operator(const SupportField &hL);

/// Smallest singular value of A in the weighted norm |x|^2 = sum d_j x_j^2.
double sigma_min(const SparseRowMatrix &A, const Eigen::Ref<const Eigen::VectorXd> &pair_weights);

/// Number of even spherical harmonics of degree <= k_max (with multiplicity).
int even_mode_count(int ambient_dim, int k_max);

struct SpectrumReport {
  std::vector<double> eigenvalues; // even_mode_count(n, k_max) leading eigenvalues, descending
  double max_imaginary = 0.0;
  double p = 0.0;
  double sigma_min = 0.0;          // of L + (1 - p)
  double margin = 0.0;             // min |lambda + 1 - p| over the whole spectrum
  double nearest_eigenvalue = 0.0; // eigenvalue realizing the margin
};

/// Leading eigenvalues of L (top of the spectrum down to the modes of
/// harmonic degree k_max at the ball) and the invertibility margin of L + (1-p).
SpectrumReport spectrum(const SupportField &hL, int k_max, double p);

} // namespace lpbm
