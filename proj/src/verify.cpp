#include "lpbm/verify.hpp"
#include "lpbm/continuation.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <cmath>

namespace lpbm {

namespace {

void check_p(double p, const char *who) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument(std::string(who) + ": p must lie in (0,1)");
}

void check_lambdas(const std::vector<double> &lambdas, const char *who) {
  if (lambdas.empty()) throw std::invalid_argument(std::string(who) + ": empty lambda grid");
  for (double l : lambdas)
    if (!(l >= 0.0 && l <= 1.0)) throw std::invalid_argument(std::string(who) + ": lambda outside [0,1]");
}

PolytopeBody unit_volume(const PolytopeBody &body) { return scaled(body, std::pow(volume(body), -1.0 / body.dim)); }

bool in_band(double slack, const VerifyOptions &o) { return slack < -o.tolerance && slack > -o.recheck_band; }

void finish(InequalityReport &r) {
  r.slack = INFINITY;
  if (r.rows.empty()) r.slack = r.lhs - r.rhs;
  else
    for (const InequalityRow &row : r.rows) r.slack = std::min({r.slack, row.slack, row.slack_pmean});
  if (!r.rows.empty() && r.kind == "log_bm") r.slack = std::min(r.slack, r.lhs - r.rhs);
  r.holds = r.slack >= -r.tolerance && r.power_mean_ordered && std::isfinite(r.slack);
}

// Facet-sum functional; K, L given as polytopes.
double polytope_functional(const PolytopeBody &K, const PolytopeBody &L, double p) {
  const FacetMeasure vbar = normalized_cone_measure_poly(K);
  const Eigen::VectorXd hl = support_values(L, vbar.directions);
  double s = 0.0;
  for (Eigen::Index k = 0; k < vbar.masses.size(); ++k) {
    if (!(vbar.offsets[k] > 0.0)) throw std::domain_error("lp_minkowski_functional: nonpositive h_K");
    s += std::pow(hl[k] / vbar.offsets[k], p) * vbar.masses[k];
  }
  return std::pow(s, 1.0 / p);
}

std::vector<InequalityRow> bm_rows(const PolytopeBody &K, const PolytopeBody &L, double p, const std::vector<double> &lambdas,
                                   bool augmented, const VerifyOptions &o, bool &ordered) {
  const int n = K.dim;
  const double vk = volume(K), vl = volume(L);
  const PolytopeBody Kn = unit_volume(K), Ln = unit_volume(L);
  auto combine = [&](const PolytopeBody &A, const PolytopeBody &B, double lambda) {
    if (!augmented) return lp_combination(A, B, lambda, p);
    // Extra directions never cut the exact combination; this recomputes it
    // through a larger halfspace system.
    const Eigen::MatrixXd S = minkowski_sum_normals(A, B);
    Eigen::MatrixXd U(n, S.cols() + A.normals.cols() + B.normals.cols());
    U << S, A.normals, B.normals;
    const Eigen::VectorXd a = support_values(A, U), b = support_values(B, U);
    Eigen::VectorXd q(U.cols());
    for (Eigen::Index j = 0; j < q.size(); ++j) q[j] = power_mean(a[j], b[j], lambda, p);
    return wulff_shape(U, q);
  };
  std::vector<InequalityRow> rows;
  for (double lambda : lambdas) {
    InequalityRow row;
    row.lambda = lambda;
    row.lhs = volume(combine(Kn, Ln, lambda)) * o.volume_fault;
    row.rhs = 1.0;
    row.slack = row.lhs - row.rhs;
    row.raw_volume = volume(combine(K, L, lambda)) * o.volume_fault;
    row.rhs_geometric = std::pow(vk, 1.0 - lambda) * std::pow(vl, lambda);
    row.rhs_pmean = std::pow((1.0 - lambda) * std::pow(vk, p / n) + lambda * std::pow(vl, p / n), n / p);
    row.slack_pmean = row.raw_volume / row.rhs_pmean - 1.0;
    if (row.rhs_pmean < row.rhs_geometric * (1.0 - 1e-14)) ordered = false;
    rows.push_back(row);
  }
  return rows;
}

PolytopeBody rebuilt(const PolytopeBody &body) { return polytope_from_points(body.vertices); }

Eigen::VectorXd pair_weights(const SphereGrid &g) {
  const auto &reps = g.representatives();
  Eigen::VectorXd w(reps.size());
  for (std::size_t j = 0; j < reps.size(); ++j) w[j] = g.weights[reps[j]] + g.weights[g.antipode[reps[j]]];
  return w;
}

double discrete_volume(const Eigen::VectorXd &hp, const TangentField &W, const Eigen::VectorXd &pw, int n) {
  double v = 0.0;
  for (Eigen::Index j = 0; j < hp.size(); ++j) v += hp[j] * W.det(j) * pw[j];
  return v / n;
}

double min_eigenvalue(const TangentField &W) {
  double m = INFINITY;
  for (Eigen::Index j = 0; j < W.size(); ++j) m = std::min(m, W.min_eigenvalue(j));
  return m;
}

Eigen::VectorXd determinants(const TangentField &W) {
  Eigen::VectorXd d(W.size());
  for (Eigen::Index j = 0; j < W.size(); ++j) d[j] = W.det(j);
  return d;
}

// Objective value and gradient (pair masses) at hp; optimality residual
// from hp and det W(hp).
struct Problem {
  std::function<std::pair<double, Eigen::VectorXd>(const Eigen::VectorXd &)> objective;
  std::function<double(const Eigen::VectorXd &, const Eigen::VectorXd &)> residual;
};

VariationalReport descend(const SupportField &hK, const Problem &prob, const VariationalOptions &o) {
  const SphereGrid &g = *hK.grid;
  const int n = g.ambient_dim;
  const TangentStencil &st = tangent_stencil(g);
  const Eigen::VectorXd pw = pair_weights(g);
  const Eigen::Index m = g.pair_count();

  // Sobolev metric I - Laplacian = n I - tr(Hess + I).
  Eigen::MatrixXd trace_weights = Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(st.components.size()));
  trace_weights.col(0).setOnes();
  if (n == 3) trace_weights.col(2).setOnes();
  SparseRowMatrix I(m, m);
  I.setIdentity();
  const Eigen::SparseMatrix<double> P = SparseRowMatrix(double(n) * I - contract(st, trace_weights));
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(P);
  if (lu.info() != Eigen::Success) throw std::runtime_error("variational descent: metric factorization failed");

  VariationalReport report;
  report.objective_at_k = prob.objective(fold(g, hK.values)).first;
  Eigen::VectorXd h = Eigen::VectorXd::Ones(m);
  TangentField W = evaluate(st, h);
  h *= std::pow(discrete_volume(h, W, pw, n), -1.0 / n);
  W = evaluate(st, h);
  auto [F, G] = prob.objective(h);
  report.objective_start = F;
  double alpha = 1.0;
  for (;;) {
    const Eigen::VectorXd det = determinants(W);
    const double r = prob.residual(h, det);
    report.residual_history.push_back(r);
    report.optimality_residual = r;
    if (r <= o.tolerance) {
      report.converged = true;
      report.message = "converged";
      break;
    }
    if (report.iterations >= o.max_iterations) {
      report.message = "no convergence after " + std::to_string(report.iterations) + " iterations";
      break;
    }
    // Exact gradient of the discrete volume; the step is projected onto its
    // Sobolev-orthogonal complement.
    Eigen::MatrixXd cof(m, static_cast<Eigen::Index>(st.components.size()));
    for (Eigen::Index j = 0; j < m; ++j) cof.row(j) = W.cofactor(j);
    const SparseRowMatrix Jdet = contract(st, cof);
    const Eigen::VectorXd dV = (det.cwiseProduct(pw) + Jdet.transpose() * h.cwiseProduct(pw)) / n;
    const Eigen::VectorXd a = lu.solve(Eigen::VectorXd(G.cwiseQuotient(pw)));
    const Eigen::VectorXd b = lu.solve(Eigen::VectorXd(dV.cwiseQuotient(pw)));
    const double mu = dV.dot(a) / dV.dot(b);
    const Eigen::VectorXd d = -(a - mu * b);
    report.stationarity = (G - mu * dV).cwiseQuotient(pw).cwiseAbs().maxCoeff() / std::abs(mu);
    if (report.stationarity <= o.tolerance) {
      report.converged = true;
      report.message = "stationary";
      break;
    }
    const double slope = G.dot(d);
    if (!(slope < 0.0) && !(std::abs(slope) <= 1e-12 * std::max(1.0, std::abs(F)))) {
      report.message = "no descent direction";
      break;
    }
    alpha = std::min(1e3, 2.0 * alpha);
    bool accepted = false;
    for (int half = 0; half <= o.max_halvings; ++half, alpha *= 0.5) {
      Eigen::VectorXd trial = h + alpha * d;
      if (trial.minCoeff() <= 0.0) continue;
      TangentField Wt = evaluate(st, trial);
      const double vt = discrete_volume(trial, Wt, pw, n);
      if (!(vt > 0.0)) continue;
      trial *= std::pow(vt, -1.0 / n);
      Wt = evaluate(st, trial);
      if (!(min_eigenvalue(Wt) >= kConvexityMargin)) continue;
      auto [Ft, Gt] = prob.objective(trial);
      // Below rounding of F the decrease test is replaced by the residual.
      const bool resolved = std::abs(alpha * slope) > 1e-12 * std::max(1.0, std::abs(F));
      if (resolved ? !(Ft <= F + 1e-4 * alpha * slope) : !(prob.residual(trial, determinants(Wt)) < r)) continue;
      h = std::move(trial);
      W = std::move(Wt);
      F = Ft;
      G = std::move(Gt);
      accepted = true;
      break;
    }
    ++report.iterations;
    if (!accepted) {
      report.message = "line search stalled";
      break;
    }
  }
  report.minimizer = SupportField{hK.grid, unfold(g, h)};
  report.objective = F;
  report.volume = discrete_volume(h, W, pw, n);
  if (!report.converged)
    throw std::runtime_error("variational descent: " + report.message + " with optimality residual " +
                             std::to_string(report.optimality_residual));
  return report;
}

void require_unit_volume(const SupportField &hK, const char *who) {
  const double v = smooth_volume(hK);
  if (std::abs(v - 1.0) > 1e-9) throw std::invalid_argument(std::string(who) + ": V(K) must be normalized to 1");
}

} // namespace

double lp_minkowski_functional(const SupportField &hK, const SupportField &hL, double p) {
  check_p(p, "lp_minkowski_functional");
  if (hK.grid != hL.grid) throw std::invalid_argument("lp_minkowski_functional: grid mismatch");
  if (hK.values.minCoeff() <= 0.0) throw std::domain_error("lp_minkowski_functional: nonpositive h_K");
  const DiscreteMeasure vbar = normalized_cone_measure(hK);
  const Eigen::VectorXd ratio = hL.values.cwiseQuotient(hK.values).array().pow(p).matrix();
  return std::pow(ratio.dot(vbar.masses), 1.0 / p);
}

double lp_minkowski_functional(const PolytopeBody &K, const PolytopeBody &L, double p) {
  check_p(p, "lp_minkowski_functional");
  if (K.dim != L.dim) throw std::invalid_argument("lp_minkowski_functional: dimension mismatch");
  return polytope_functional(K, L, p);
}

InequalityReport check_lp_minkowski(const PolytopeBody &K, const PolytopeBody &L, double p, const VerifyOptions &options) {
  check_p(p, "check_lp_minkowski");
  if (K.dim != L.dim) throw std::invalid_argument("check_lp_minkowski: dimension mismatch");
  InequalityReport r;
  r.kind = "lp_minkowski";
  r.p = p;
  r.tolerance = options.tolerance;
  r.lhs = polytope_functional(unit_volume(K), unit_volume(L), p);
  r.rhs = 1.0;
  finish(r);
  if (in_band(r.slack, options)) {
    r.rechecked = true;
    r.lhs = polytope_functional(unit_volume(rebuilt(K)), unit_volume(rebuilt(L)), p);
    finish(r);
  }
  return r;
}

InequalityReport check_lp_bm(const PolytopeBody &K, const PolytopeBody &L, double p, const std::vector<double> &lambdas,
                             const VerifyOptions &options) {
  check_p(p, "check_lp_bm");
  check_lambdas(lambdas, "check_lp_bm");
  if (K.dim != L.dim) throw std::invalid_argument("check_lp_bm: dimension mismatch");
  InequalityReport r;
  r.kind = "lp_bm";
  r.p = p;
  r.tolerance = options.tolerance;
  r.rows = bm_rows(K, L, p, lambdas, false, options, r.power_mean_ordered);
  finish(r);
  if (in_band(r.slack, options)) {
    r.rechecked = true;
    r.power_mean_ordered = true;
    r.rows = bm_rows(rebuilt(K), rebuilt(L), p, lambdas, true, options, r.power_mean_ordered);
    finish(r);
  }
  const auto worst = std::min_element(r.rows.begin(), r.rows.end(),
                                      [](const InequalityRow &a, const InequalityRow &b) { return a.slack < b.slack; });
  r.lhs = worst->lhs;
  r.rhs = worst->rhs;
  return r;
}

InequalityReport check_log_bm(const SupportField &hK, const SupportField &hL, const std::vector<double> &lambdas,
                              const VerifyOptions &options) {
  if (hK.grid != hL.grid) throw std::invalid_argument("check_log_bm: grid mismatch");
  if (!lambdas.empty()) check_lambdas(lambdas, "check_log_bm");
  if (hK.values.minCoeff() <= 0.0 || hL.values.minCoeff() <= 0.0) throw std::domain_error("check_log_bm: nonpositive support");
  const Eigen::VectorXd ball = Eigen::VectorXd::Ones(hK.values.size());
  if (c2_distance(hK, SupportField{hK.grid, ball}) > options.near_ball * (1.0 + 1e-9))
    throw std::invalid_argument("check_log_bm: K is outside the near-ball neighbourhood");
  const int n = hK.dim();
  InequalityReport r;
  r.kind = "log_bm";
  r.p = 0.0;
  r.tolerance = options.tolerance;
  const DiscreteMeasure vbar = normalized_cone_measure(hK);
  r.lhs = hL.values.cwiseQuotient(hK.values).array().log().matrix().dot(vbar.masses);
  r.rhs = std::log(smooth_volume(hL) / smooth_volume(hK)) / n;
  const double wk = volume(wulff_shape(hK.values, *hK.grid)), wl = volume(wulff_shape(hL.values, *hL.grid));
  const SupportField kn{hK.grid, hK.values * std::pow(wk, -1.0 / n)}, ln{hL.grid, hL.values * std::pow(wl, -1.0 / n)};
  for (double lambda : lambdas) {
    InequalityRow row;
    row.lambda = lambda;
    row.lhs = volume(log_combination(kn, ln, lambda)) * options.volume_fault;
    row.rhs = 1.0;
    row.slack = row.lhs - row.rhs;
    row.raw_volume = volume(log_combination(hK, hL, lambda)) * options.volume_fault;
    row.rhs_geometric = row.rhs_pmean = std::pow(wk, 1.0 - lambda) * std::pow(wl, lambda);
    row.slack_pmean = row.raw_volume / row.rhs_geometric - 1.0;
    r.rows.push_back(row);
  }
  finish(r);
  return r;
}

InequalityReport check_log_bm(const GridPtr &grid, const SupportFunction &hK, const SupportFunction &hL,
                              const std::vector<double> &lambdas, const VerifyOptions &options) {
  auto run = [&](const GridPtr &g) {
    return check_log_bm(make_support_field(g, sample(*g, hK)), make_support_field(g, sample(*g, hL)), lambdas, options);
  };
  InequalityReport r = run(grid);
  if (in_band(r.slack, options)) {
    r = run(make_grid(grid->ambient_dim, 2 * grid->resolution));
    r.rechecked = true;
  }
  return r;
}

SupportField normalize_volume(const SupportField &h) {
  return SupportField{h.grid, h.values * std::pow(smooth_volume(h), -1.0 / h.dim())};
}

VariationalReport variational_minimize(const SupportField &hK, double p, const VariationalOptions &options) {
  check_p(p, "variational_minimize");
  require_unit_volume(hK, "variational_minimize");
  const SphereGrid &g = *hK.grid;
  const Eigen::VectorXd hk = fold(g, hK.values);
  const Eigen::VectorXd detk = determinants(evaluate(tangent_stencil(g), hk));
  const Eigen::VectorXd pw = pair_weights(g);
  const Eigen::VectorXd vk = hk.cwiseProduct(detk).cwiseProduct(pw) / g.ambient_dim;
  // h_K^(1-p) det W_K: the right-hand side of the optimality condition up to h^(p-1).
  const Eigen::VectorXd target = hk.array().pow(1.0 - p).matrix().cwiseProduct(detk);
  Problem prob;
  prob.objective = [&](const Eigen::VectorXd &h) {
    const Eigen::ArrayXd ratio = h.cwiseQuotient(hk).array();
    const double F = (ratio.pow(p) * vk.array()).sum();
    const Eigen::VectorXd G = (p * ratio.pow(p - 1.0) / hk.array() * vk.array()).matrix();
    return std::pair{F, G};
  };
  prob.residual = [&](const Eigen::VectorXd &h, const Eigen::VectorXd &det) {
    return (det.array() - h.array().pow(p - 1.0) * target.array()).abs().maxCoeff();
  };
  return descend(hK, prob, options);
}

VariationalReport log_variational_minimize(const SupportField &hK, const VariationalOptions &options) {
  require_unit_volume(hK, "log_variational_minimize");
  const SphereGrid &g = *hK.grid;
  const int n = g.ambient_dim;
  const Eigen::VectorXd hk = fold(g, hK.values);
  const Eigen::VectorXd detk = determinants(evaluate(tangent_stencil(g), hk));
  const Eigen::VectorXd pw = pair_weights(g);
  const Eigen::VectorXd vk = hk.cwiseProduct(detk).cwiseProduct(pw) / n;
  Problem prob;
  prob.objective = [&](const Eigen::VectorXd &h) {
    return std::pair{h.array().log().matrix().dot(vk), Eigen::VectorXd(vk.cwiseQuotient(h))};
  };
  prob.residual = [&](const Eigen::VectorXd &h, const Eigen::VectorXd &det) {
    return (h.cwiseProduct(det) - hk.cwiseProduct(detk)).cwiseAbs().maxCoeff() / n;
  };
  return descend(hK, prob, options);
}

SolveReport solve_log_minkowski(const GridPtr &grid, const Eigen::Ref<const Eigen::VectorXd> &f,
                                const std::optional<SupportField> &init, const SolverOptions &options) {
  if (!grid) throw std::invalid_argument("solve_log_minkowski: null grid");
  return solve_lp_minkowski(grid, Eigen::VectorXd(grid->ambient_dim * f), 0.0, init, options);
}

PolytopeBody random_symmetric_polytope(int dim, std::mt19937_64 &rng) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("random_symmetric_polytope: dim must be 2 or 3");
  std::uniform_int_distribution<int> count(dim == 2 ? 3 : 4, dim == 2 ? 8 : 10);
  std::normal_distribution<double> gauss;
  for (;;) {
    Eigen::MatrixXd pts(dim, count(rng));
    for (Eigen::Index j = 0; j < pts.cols(); ++j)
      for (int i = 0; i < dim; ++i) pts(i, j) = gauss(rng);
    try {
      return polytope_from_points(pts);
    } catch (const std::exception &) {
      // degenerate draw (probability zero in exact arithmetic); redraw
    }
  }
}

SupportField random_smooth_body(const GridPtr &grid, std::mt19937_64 &rng) {
  const int n = grid->ambient_dim;
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> radius(0.5, 2.0);
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = gauss(rng);
  const Eigen::MatrixXd R = Eigen::HouseholderQR<Eigen::MatrixXd>(A).householderQ();
  Eigen::VectorXd r(n);
  for (int i = 0; i < n; ++i) r[i] = radius(rng);
  const Eigen::VectorXd e = sample(*grid, [&](const Eigen::VectorXd &x) { return r.cwiseProduct(R.transpose() * x).norm(); });
  const Eigen::VectorXd Y = random_even_polynomial(*grid, 4, rng);
  for (double s = 0.1;; s *= 0.5) {
    const SupportField h = make_support_field(grid, e.cwiseProduct(Eigen::VectorXd::Ones(e.size()) + s * Y));
    if (s < 1e-6 || convexity_margin(h) >= 1e-6) return h;
  }
}

SupportField near_ball_body(const GridPtr &grid, double radius, std::mt19937_64 &rng) {
  if (!(radius > 0.0 && radius < 0.5)) throw std::invalid_argument("near_ball_body: radius must lie in (0, 0.5)");
  const Eigen::VectorXd Y = random_even_polynomial(*grid, 6, rng);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(Y.size());
  // The C^2 distance is linear in the perturbation.
  const double unit = 2.0 * c2_distance(SupportField{grid, one + 0.5 * Y}, SupportField{grid, one});
  return make_support_field(grid, one + (radius / unit) * Y);
}

namespace {

void record(BatchSummary &s, int pair, const InequalityReport &r) {
  s.rechecks += r.rechecked;
  if (r.rows.empty()) {
    s.rows.push_back({pair, r.kind, r.p, 0.0, r.lhs, r.rhs, r.slack, r.holds});
  } else {
    for (const InequalityRow &row : r.rows) {
      const double slack = std::min(row.slack, row.slack_pmean);
      s.rows.push_back({pair, r.kind, r.p, row.lambda, row.lhs, row.rhs, slack, slack >= -r.tolerance});
    }
  }
  ++s.checks;
  if (!r.holds) ++s.violations;
  s.worst_slack = std::min(s.worst_slack, r.slack);
}

BatchSummary start_batch(int pairs, std::uint64_t seed, const char *who) {
  if (pairs < 1) throw std::invalid_argument(std::string(who) + ": pairs must be positive");
  BatchSummary s;
  s.seed = seed;
  s.pairs = pairs;
  s.worst_slack = INFINITY;
  return s;
}

} // namespace

// Runs job(i) for i < count on up to `workers` threads; results keep index order.
template <class Job> std::vector<InequalityReport> run_jobs(int count, int workers, const Job &job) {
  std::vector<std::vector<InequalityReport>> out(count);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        out[i] = job(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int threads = std::clamp(workers, 1, std::max(count, 1));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread &t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  std::vector<InequalityReport> flat;
  for (auto &v : out)
    for (auto &r : v) flat.push_back(std::move(r));
  return flat;
}

BatchSummary polytope_battery(int dim, int pairs, const std::vector<double> &p_list, const std::vector<double> &lambdas,
                              std::uint64_t seed, const VerifyOptions &options, bool identical_pairs) {
  BatchSummary s = start_batch(pairs, seed, "polytope_battery");
  std::mt19937_64 rng(seed);
  std::vector<std::pair<PolytopeBody, PolytopeBody>> bodies;
  for (int i = 0; i < pairs; ++i) {
    PolytopeBody K = random_symmetric_polytope(dim, rng);
    PolytopeBody L = identical_pairs ? K : random_symmetric_polytope(dim, rng);
    bodies.emplace_back(std::move(K), std::move(L));
  }
  const auto reports = run_jobs(pairs, options.workers, [&](int i) {
    std::vector<InequalityReport> r;
    for (double p : p_list) {
      r.push_back(check_lp_minkowski(bodies[i].first, bodies[i].second, p, options));
      r.push_back(check_lp_bm(bodies[i].first, bodies[i].second, p, lambdas, options));
    }
    return r;
  });
  const std::size_t per_pair = 2 * p_list.size();
  for (std::size_t k = 0; k < reports.size(); ++k) record(s, static_cast<int>(k / per_pair), reports[k]);
  return s;
}

BatchSummary log_battery(const GridPtr &grid, int pairs, const std::vector<double> &lambdas, std::uint64_t seed,
                         const VerifyOptions &options) {
  BatchSummary s = start_batch(pairs, seed, "log_battery");
  std::mt19937_64 rng(seed);
  const SupportField K = near_ball_body(grid, options.near_ball, rng);
  std::vector<SupportField> Ls;
  for (int i = 0; i < pairs; ++i) Ls.push_back(random_smooth_body(grid, rng));
  const auto reports = run_jobs(pairs, options.workers, [&](int i) {
    return std::vector<InequalityReport>{check_log_bm(K, Ls[i], lambdas, options)};
  });
  for (int i = 0; i < pairs; ++i) record(s, i, reports[i]);
  return s;
}

} // namespace lpbm
