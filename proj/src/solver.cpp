#include "lpbm/solver.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <random>

namespace lpbm {

namespace {

using ColMatrix = Eigen::SparseMatrix<double>;
using LU = Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>>;

struct State {
  Eigen::VectorXd hp;
  TangentField W;
  Eigen::VectorXd R;
  double margin = 0.0;
  double sup = 0.0;
};

State evaluate_state(const TangentStencil &st, const Eigen::VectorXd &hp, const Eigen::VectorXd &fp, double p) {
  State s;
  s.hp = hp;
  s.W = evaluate(st, hp);
  s.R.resize(hp.size());
  s.margin = INFINITY;
  for (Eigen::Index j = 0; j < hp.size(); ++j) {
    s.margin = std::min(s.margin, s.W.min_eigenvalue(j));
    s.R[j] = s.W.det(j) - fp[j] * std::pow(hp[j], p - 1.0);
  }
  s.sup = s.R.cwiseAbs().maxCoeff();
  return s;
}

// d/dh [det W(h) - f h^(p-1)] on pair coordinates.
SparseRowMatrix newton_matrix(const TangentStencil &st, const State &s, const Eigen::VectorXd &fp, double p) {
  const Eigen::Index m = s.hp.size();
  Eigen::MatrixXd cof(m, static_cast<Eigen::Index>(st.components.size()));
  for (Eigen::Index j = 0; j < m; ++j) cof.row(j) = s.W.cofactor(j);
  SparseRowMatrix J = contract(st, cof);
  if (p != 1.0) {
    Eigen::VectorXd zero_order(m);
    for (Eigen::Index j = 0; j < m; ++j) zero_order[j] = -(p - 1.0) * fp[j] * std::pow(s.hp[j], p - 2.0);
    SparseRowMatrix D(m, m);
    D.setIdentity();
    J += SparseRowMatrix(zero_order.asDiagonal() * D);
  }
  return J;
}

Eigen::VectorXd pair_weights(const SphereGrid &g) {
  const auto &reps = g.representatives();
  Eigen::VectorXd w(reps.size());
  for (std::size_t j = 0; j < reps.size(); ++j) w[j] = g.weights[reps[j]] + g.weights[g.antipode[reps[j]]];
  return w;
}

// 1 / sqrt(largest eigenvalue of (A^T D A)^-1 D) by power iteration on an
// existing factorization.
double sigma_min_from_lu(LU &lu, const Eigen::VectorXd &d) {
  const Eigen::VectorXd sd = d.cwiseSqrt(), isd = sd.cwiseInverse();
  Eigen::VectorXd x = Eigen::VectorXd::Ones(d.size()).normalized();
  double est = 0.0;
  for (int it = 0; it < 300; ++it) {
    const Eigen::VectorXd y = sd.cwiseProduct(lu.solve(Eigen::VectorXd(isd.cwiseProduct(x))));
    const Eigen::VectorXd z = isd.cwiseProduct(lu.transpose().solve(Eigen::VectorXd(sd.cwiseProduct(y))));
    const double next = std::sqrt(z.norm());
    if (!std::isfinite(next)) return 0.0;
    x = z / z.norm();
    if (it > 3 && std::abs(next - est) <= 1e-10 * next) {
      est = next;
      break;
    }
    est = next;
  }
  return est > 0.0 ? 1.0 / est : 0.0;
}

void validate_density(const SphereGrid &g, const Eigen::Ref<const Eigen::VectorXd> &f, const char *who) {
  if (f.size() != g.size()) throw std::invalid_argument(std::string(who) + ": density length mismatch");
  if (!f.allFinite() || f.minCoeff() <= 0.0) throw std::invalid_argument(std::string(who) + ": density must be positive");
}

SupportField from_pairs(const GridPtr &grid, const Eigen::VectorXd &hp) { return SupportField{grid, unfold(*grid, hp)}; }

SolveReport run_newton(const GridPtr &grid, const Eigen::VectorXd &f, double p, const std::optional<SupportField> &init,
                       const SolverOptions &options) {
  const auto start = std::chrono::steady_clock::now();
  const SphereGrid &g = *grid;
  const int n = g.ambient_dim;
  const TangentStencil &st = tangent_stencil(g);
  const Eigen::VectorXd fp = fold(g, symmetrize(g, f));

  auto report = std::make_shared<SolveReport>();
  report->p = p;
  report->tolerance = options.tolerance > 0.0 ? options.tolerance : default_tolerance(n);
  Eigen::VectorXd hp;
  if (init) {
    if (init->grid != grid && (init->grid->size() != g.size() || init->grid->nodes != g.nodes)) throw std::invalid_argument("solver: init on a different grid");
    hp = fold(g, init->values);
  } else {
    const double mean = integrate(g, f) / sphere_area(n);
    hp = Eigen::VectorXd::Constant(g.pair_count(), std::pow(mean, 1.0 / (n - p)));
  }
  auto finish = [&](State &s) {
    report->solution = from_pairs(grid, s.hp);
    report->residual_sup = s.sup;
    report->convexity_margin = s.margin;
    report->wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  State s = evaluate_state(st, hp, fp, p);
  report->trace.push_back({0, s.sup, 0.0, s.margin, NAN});
  if (!(s.margin >= kConvexityMargin) || hp.minCoeff() <= 0.0) {
    finish(s);
    report->message = "initial field is not convex-admissible";
    throw SolverError(SolverError::Kind::ConvexityCollapse, report->message, report);
  }
  const Eigen::VectorXd pw = pair_weights(g);
  while (s.sup > report->tolerance) {
    if (report->iterations >= options.max_iterations) {
      finish(s);
      report->message = "no convergence after " + std::to_string(report->iterations) + " iterations";
      throw SolverError(SolverError::Kind::NonConvergence, report->message, report);
    }
    const ColMatrix J = newton_matrix(st, s, fp, p);
    LU lu;
    lu.compute(J);
    double sig = NAN;
    if (lu.info() == Eigen::Success && options.track_sigma) sig = sigma_min_from_lu(lu, Eigen::VectorXd::Ones(J.rows()));
    if (lu.info() != Eigen::Success || (options.track_sigma && sig < options.singular_threshold)) {
      finish(s);
      report->message = "singular Newton system";
      throw SolverError(SolverError::Kind::Singular, report->message, report);
    }
    const Eigen::VectorXd phi = lu.solve(Eigen::VectorXd(-s.R));
    double alpha = 1.0;
    bool accepted = false;
    for (int half = 0; half <= options.max_halvings; ++half, alpha *= 0.5) {
      const Eigen::VectorXd trial = s.hp + alpha * phi;
      if (trial.minCoeff() <= 0.0) continue;
      State next = evaluate_state(st, trial, fp, p);
      if (!(next.margin >= kConvexityMargin) || !(next.sup < s.sup)) continue;
      s = std::move(next);
      accepted = true;
      break;
    }
    ++report->iterations;
    if (!accepted) {
      finish(s);
      report->message = "line search failed after " + std::to_string(options.max_halvings) + " halvings";
      throw SolverError(SolverError::Kind::LineSearch, report->message, report);
    }
    report->trace.push_back({report->iterations, s.sup, alpha, s.margin, sig});
  }
  finish(s);
  report->converged = true;
  // L + (1-p) = diag(h / det W) J at a solution.
  const Eigen::Index m = s.hp.size();
  Eigen::VectorXd scale(m);
  for (Eigen::Index j = 0; j < m; ++j) scale[j] = s.hp[j] / s.W.det(j);
  const SparseRowMatrix Lp = scale.asDiagonal() * newton_matrix(st, s, fp, p);
  report->sigma_min = sigma_min(Lp, pw);
  report->wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report->message = "converged";
  return *report;
}

} // namespace

double default_tolerance(int ambient_dim) { return ambient_dim == 2 ? 1e-10 : 1e-7; }

const char *to_string(SolverError::Kind kind) {
  switch (kind) {
  case SolverError::Kind::NonConvergence: return "non-convergence";
  case SolverError::Kind::ConvexityCollapse: return "convexity-collapse";
  case SolverError::Kind::Singular: return "singular-linearization";
  case SolverError::Kind::LineSearch: return "line-search-failure";
  case SolverError::Kind::Barycenter: return "barycenter-violation";
  }
  return "unknown";
}

Eigen::VectorXd residual(const SupportField &h, const Eigen::Ref<const Eigen::VectorXd> &f, double p) {
  const SphereGrid &g = *h.grid;
  validate_density(g, f, "residual");
  if (h.values.minCoeff() <= 0.0) throw std::invalid_argument("residual: support values must be positive");
  const State s = evaluate_state(tangent_stencil(g), fold(g, h.values), fold(g, f), p);
  if (!(s.margin >= kConvexityMargin))
    throw ConvexityViolation("residual: convexity violation, margin " + std::to_string(s.margin), s.margin);
  Eigen::VectorXd out(g.size());
  const auto &pair = g.pair_of();
  for (Eigen::Index i = 0; i < g.size(); ++i) out[i] = s.W.det(pair[i]) - f[i] * std::pow(h.values[i], p - 1.0);
  return out;
}

StepResult newton_step(const SupportField &h, const Eigen::Ref<const Eigen::VectorXd> &f, double p,
                       const SolverOptions &options) {
  const SphereGrid &g = *h.grid;
  validate_density(g, f, "newton_step");
  const TangentStencil &st = tangent_stencil(g);
  const Eigen::VectorXd fp = fold(g, symmetrize(g, f));
  const State s = evaluate_state(st, fold(g, h.values), fp, p);
  if (!(s.margin >= kConvexityMargin))
    throw ConvexityViolation("newton_step: convexity violation, margin " + std::to_string(s.margin), s.margin);
  StepResult out{h, s.sup, s.sup, 0.0, s.margin, NAN};
  if (s.sup == 0.0) return out;
  const ColMatrix J = newton_matrix(st, s, fp, p);
  LU lu;
  lu.compute(J);
  if (lu.info() != Eigen::Success) throw SolverError(SolverError::Kind::Singular, "newton_step: singular Newton system");
  if (options.track_sigma) {
    out.sigma_min = sigma_min_from_lu(lu, Eigen::VectorXd::Ones(J.rows()));
    if (out.sigma_min < options.singular_threshold)
      throw SolverError(SolverError::Kind::Singular, "newton_step: singular Newton system");
  }
  const Eigen::VectorXd phi = lu.solve(Eigen::VectorXd(-s.R));
  double alpha = 1.0;
  for (int half = 0; half <= options.max_halvings; ++half, alpha *= 0.5) {
    const Eigen::VectorXd trial = s.hp + alpha * phi;
    if (trial.minCoeff() <= 0.0) continue;
    const State next = evaluate_state(st, trial, fp, p);
    if (!(next.margin >= kConvexityMargin) || !(next.sup < s.sup)) continue;
    out.h = from_pairs(h.grid, trial);
    out.residual_after = next.sup;
    out.damping = alpha;
    out.margin = next.margin;
    return out;
  }
  throw SolverError(SolverError::Kind::LineSearch, "newton_step: line search failed");
}

SolveReport solve_lp_minkowski(const GridPtr &grid, const Eigen::Ref<const Eigen::VectorXd> &f, double p,
                               const std::optional<SupportField> &init, const SolverOptions &options) {
  if (!grid) throw std::invalid_argument("solve_lp_minkowski: null grid");
  validate_density(*grid, f, "solve_lp_minkowski");
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("solve_lp_minkowski: p must lie in [0,1)");
  if (oddness(*grid, f) > 1e-12 * f.cwiseAbs().maxCoeff())
    throw std::invalid_argument("solve_lp_minkowski: density is not even");
  return run_newton(grid, f, p, init, options);
}

SolveReport solve_classical_minkowski(const GridPtr &grid, const Eigen::Ref<const Eigen::VectorXd> &rho,
                                      const std::optional<SupportField> &init, const SolverOptions &options) {
  if (!grid) throw std::invalid_argument("solve_classical_minkowski: null grid");
  validate_density(*grid, rho, "solve_classical_minkowski");
  const double total = integrate(*grid, rho);
  const Eigen::VectorXd barycenter = grid->nodes * grid->weights.cwiseProduct(rho);
  if (oddness(*grid, rho) > 1e-12 * rho.cwiseAbs().maxCoeff() || barycenter.norm() > 1e-10 * total)
    throw SolverError(SolverError::Kind::Barycenter,
                      "solve_classical_minkowski: density is not even (barycenter " +
                          std::to_string(barycenter.norm() / total) + ")");
  return run_newton(grid, rho, 1.0, init, options);
}

SupportField apply_map_A(const SupportField &h, double t, const Eigen::Ref<const Eigen::VectorXd> &f, double p,
                         double p_tilde, const SupportField &hL, const SolverOptions &options) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("apply_map_A: t must lie in [0,1]");
  if (h.grid != hL.grid) throw std::invalid_argument("apply_map_A: grid mismatch");
  const DiscreteMeasure S = surface_area_measure(hL);
  const Eigen::VectorXd detL = S.masses.cwiseQuotient(h.grid->weights);
  const Eigen::VectorXd f0 = detL.cwiseProduct(hL.values.array().pow(1.0 - p_tilde).matrix());
  const Eigen::VectorXd ft = (1.0 - t) * f0 + t * f;
  const double e = (1.0 - t) * p_tilde + t * p;
  const Eigen::VectorXd rho = ft.cwiseProduct(h.values.array().pow(e - 1.0).matrix());
  return solve_classical_minkowski(h.grid, rho, h, options).solution;
}

SparseRowMatrix linearized_operator_sparse(const SupportField &hL) {
  const SphereGrid &g = *hL.grid;
  const TangentStencil &st = tangent_stencil(g);
  const Eigen::VectorXd hp = fold(g, hL.values);
  const TangentField W = evaluate(st, hp);
  const Eigen::Index m = hp.size();
  Eigen::MatrixXd weights(m, static_cast<Eigen::Index>(st.components.size()));
  for (Eigen::Index j = 0; j < m; ++j) {
    if (!(W.min_eigenvalue(j) >= kConvexityMargin))
      throw ConvexityViolation("linearized_operator: convexity violation", W.min_eigenvalue(j));
    weights.row(j) = W.cofactor(j) * (hp[j] / W.det(j));
  }
  return contract(st, weights);
}

Eigen::MatrixXd linearized_operator(const SupportField &hL) { return Eigen::MatrixXd(linearized_operator_sparse(hL)); }

double sigma_min(const SparseRowMatrix &A, const Eigen::Ref<const Eigen::VectorXd> &pair_weights) {
  if (A.rows() != A.cols() || A.rows() != pair_weights.size()) throw std::invalid_argument("sigma_min: size mismatch");
  const ColMatrix Ac = A;
  LU lu;
  lu.compute(Ac);
  if (lu.info() != Eigen::Success) return 0.0;
  return sigma_min_from_lu(lu, pair_weights);
}

int even_mode_count(int ambient_dim, int k_max) {
  int count = 0;
  for (int k = 0; k <= k_max; k += 2) count += ambient_dim == 2 ? (k == 0 ? 1 : 2) : 2 * k + 1;
  return count;
}

namespace {

// Eigenvalues of A nearest to `shift` by shift-invert subspace iteration
// with Rayleigh-Ritz extraction; sorted by distance to the shift.
std::vector<std::complex<double>> eigs_near(const SparseRowMatrix &A, double shift, int count) {
  const Eigen::Index m = A.rows();
  const int block = std::min<int>(static_cast<int>(m), count + std::max(8, count / 2));
  ColMatrix S = A;
  ColMatrix I(m, m);
  I.setIdentity();
  S -= shift * I;
  LU lu;
  lu.compute(S);
  if (lu.info() != Eigen::Success) throw std::runtime_error("spectrum: shift coincides with an eigenvalue");
  std::mt19937_64 rng(20240611);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd X(m, block);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = gauss(rng);
  auto orthonormalize = [&](const Eigen::MatrixXd &Y) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
    return Eigen::MatrixXd(qr.householderQ() * Eigen::MatrixXd::Identity(m, block));
  };
  X = orthonormalize(X);
  std::vector<std::complex<double>> prev;
  for (int it = 0; it < 1000; ++it) {
    X = orthonormalize(lu.solve(X));
    const Eigen::MatrixXd H = X.transpose() * (A * X);
    Eigen::EigenSolver<Eigen::MatrixXd> es(H, false);
    if (es.info() != Eigen::Success) throw std::runtime_error("spectrum: eigensolver failure");
    std::vector<std::complex<double>> ritz(es.eigenvalues().data(), es.eigenvalues().data() + block);
    std::sort(ritz.begin(), ritz.end(), [&](auto a, auto b) { return std::abs(a - shift) < std::abs(b - shift); });
    ritz.resize(count);
    bool done = !prev.empty();
    for (int k = 0; k < count && done; ++k) done = std::abs(ritz[k] - prev[k]) <= 1e-12 * std::max(1.0, std::abs(ritz[k]));
    prev = std::move(ritz);
    if (done) return prev;
  }
  throw std::runtime_error("spectrum: eigensolver failure (no convergence)");
}

} // namespace

SpectrumReport spectrum(const SupportField &hL, int k_max, double p) {
  if (k_max < 0) throw std::invalid_argument("spectrum: k_max must be >= 0");
  const SphereGrid &g = *hL.grid;
  const int n = g.ambient_dim;
  const SparseRowMatrix L = linearized_operator_sparse(hL);
  const int count = std::min<int>(even_mode_count(n, k_max), static_cast<int>(L.rows()));
  SpectrumReport r;
  r.p = p;
  std::vector<std::complex<double>> top, nearest;
  if (L.rows() <= 600) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(L), false);
    if (es.info() != Eigen::Success) throw std::runtime_error("spectrum: eigensolver failure");
    std::vector<std::complex<double>> all(es.eigenvalues().data(), es.eigenvalues().data() + L.rows());
    top = all;
    std::sort(top.begin(), top.end(), [](auto a, auto b) { return a.real() > b.real(); });
    top.resize(count);
    nearest = all;
    std::sort(nearest.begin(), nearest.end(),
              [&](auto a, auto b) { return std::abs(a - (p - 1.0)) < std::abs(b - (p - 1.0)); });
  } else {
    top = eigs_near(L, n, count);
    std::sort(top.begin(), top.end(), [](auto a, auto b) { return a.real() > b.real(); });
    nearest = eigs_near(L, p - 1.0, 4);
  }
  for (const auto &z : top) {
    r.eigenvalues.push_back(z.real());
    r.max_imaginary = std::max(r.max_imaginary, std::abs(z.imag()));
  }
  r.nearest_eigenvalue = nearest.front().real();
  r.margin = std::abs(nearest.front() + (1.0 - p));
  SparseRowMatrix I(L.rows(), L.cols());
  I.setIdentity();
  r.sigma_min = sigma_min(L + (1.0 - p) * I, pair_weights(g));
  return r;
}

} // namespace lpbm
