#include "lpbm/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lpbm {

namespace {

void push(ContinuationTrace &trace, double value, const SolveReport &r) {
  const double dist = trace.solutions.empty() ? 0.0 : hausdorff_distance_even(r.solution, trace.solutions.back());
  trace.values.push_back(value);
  trace.solutions.push_back(r.solution);
  trace.residual.push_back(r.residual_sup);
  trace.sigma_min.push_back(r.sigma_min);
  trace.step_distance.push_back(dist);
  trace.iterations.push_back(r.iterations);
  trace.last_good = value;
}

void validate(const GridPtr &grid, const Eigen::Ref<const Eigen::VectorXd> &f, const char *who) {
  if (!grid) throw std::invalid_argument(std::string(who) + ": null grid");
  if (f.size() != grid->size()) throw std::invalid_argument(std::string(who) + ": density length mismatch");
  if (!f.allFinite() || f.minCoeff() <= 0.0) throw std::invalid_argument(std::string(who) + ": density must be positive");
  if (oddness(*grid, f) > 1e-12 * f.cwiseAbs().maxCoeff()) throw std::invalid_argument(std::string(who) + ": density is not even");
}

// Exponent vectors of all degree-d monomials in n variables.
std::vector<std::vector<int>> monomials(int n, int d) {
  std::vector<std::vector<int>> out;
  std::vector<int> e(n, 0);
  auto rec = [&](auto &&self, int k, int left) -> void {
    if (k == n - 1) {
      e[k] = left;
      out.push_back(e);
      return;
    }
    for (int a = left; a >= 0; --a) {
      e[k] = a;
      self(self, k + 1, left - a);
    }
  };
  rec(rec, 0, d);
  return out;
}

} // namespace

ContinuationTrace continuation_run(const GridPtr &grid, const Eigen::Ref<const Eigen::VectorXd> &f1, double p, int steps,
                                   const ContinuationOptions &options) {
  validate(grid, f1, "continuation_run");
  if (steps < 2) throw std::invalid_argument("continuation_run: steps must be >= 2");
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("continuation_run: p must lie in [0,1)");
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(grid->size());
  ContinuationTrace trace;
  trace.parameter = "t";
  trace.p = p;
  auto solve_at = [&](double t) {
    const Eigen::VectorXd ft = (1.0 - t) * one + t * Eigen::VectorXd(f1);
    std::optional<SupportField> init;
    if (!trace.solutions.empty()) init = trace.solutions.back();
    return solve_lp_minkowski(grid, ft, p, init, options.solver);
  };
  try {
    push(trace, 0.0, solve_at(0.0));
  } catch (const std::exception &e) {
    trace.message = std::string("failed at t = 0: ") + e.what();
    return trace;
  }
  for (int k = 1; k <= steps; ++k) {
    const double target = static_cast<double>(k) / steps;
    // Shrink the step by halving after a failure; every accepted sub-step
    // advances from the last good t.
    double h = target - trace.last_good;
    int level = 0;
    while (trace.last_good < target) {
      const double t = std::min(target, trace.last_good + h);
      try {
        push(trace, t, solve_at(t));
      } catch (const std::exception &e) {
        if (level == options.max_bisections) {
          trace.message = "failed at t = " + std::to_string(t) + " after " + std::to_string(level) +
                          " bisections (last good t = " + std::to_string(trace.last_good) + "): " + e.what();
          return trace;
        }
        ++level;
        h *= 0.5;
      }
    }
  }
  trace.completed = true;
  trace.message = "completed";
  return trace;
}

ContinuationTrace p_sweep(const GridPtr &grid, const Eigen::Ref<const Eigen::VectorXd> &f, const std::vector<double> &p_list,
                          const ContinuationOptions &options) {
  validate(grid, f, "p_sweep");
  if (p_list.empty()) throw std::invalid_argument("p_sweep: empty p list");
  for (std::size_t k = 0; k < p_list.size(); ++k) {
    if (!(p_list[k] >= 0.0 && p_list[k] < 1.0)) throw std::invalid_argument("p_sweep: p must lie in [0,1)");
    if (k > 0 && !(p_list[k] < p_list[k - 1])) throw std::invalid_argument("p_sweep: p list must be strictly decreasing");
  }
  ContinuationTrace trace;
  trace.parameter = "p";
  for (double p : p_list) {
    std::optional<SupportField> init;
    if (!trace.solutions.empty()) init = trace.solutions.back();
    try {
      push(trace, p, solve_lp_minkowski(grid, f, p, init, options.solver));
    } catch (const std::exception &e) {
      trace.message = "failed at p = " + std::to_string(p) + ": " + e.what();
      return trace;
    }
  }
  trace.completed = true;
  trace.message = "completed";
  return trace;
}

Eigen::VectorXd random_even_polynomial(const SphereGrid &grid, int degree, std::mt19937_64 &rng) {
  if (degree < 0 || degree % 2 != 0) throw std::invalid_argument("random_even_polynomial: degree must be even");
  const int n = grid.ambient_dim;
  const auto exps = monomials(n, degree);
  std::normal_distribution<double> gauss;
  std::vector<double> coef(exps.size());
  for (double &a : coef) a = gauss(rng);
  const Eigen::VectorXd Y = sample(grid, [&](const Eigen::VectorXd &x) {
    double v = 0.0;
    for (std::size_t m = 0; m < exps.size(); ++m) {
      double term = coef[m];
      for (int i = 0; i < n; ++i) term *= std::pow(x[i], exps[m][i]);
      v += term;
    }
    return v;
  });
  const double scale = Y.cwiseAbs().maxCoeff();
  return symmetrize(grid, scale > 0.0 ? Eigen::VectorXd(Y / scale) : Y);
}

SupportField random_even_start(const GridPtr &grid, double c, double amplitude, int max_degree, std::mt19937_64 &rng) {
  const Eigen::VectorXd noise = random_even_polynomial(*grid, max_degree, rng);
  double eps = std::uniform_real_distribution<double>(0.0, amplitude)(rng);
  for (;;) {
    SupportField h = make_support_field(grid, c * (Eigen::VectorXd::Ones(grid->size()) + eps * noise));
    if (eps == 0.0 || convexity_margin(h) >= 1e3 * kConvexityMargin) return h;
    eps *= 0.5;
    if (eps < 1e-6) eps = 0.0;
  }
}

std::vector<int> cluster_labels(const Eigen::Ref<const Eigen::MatrixXd> &distances, double delta) {
  const int m = static_cast<int>(distances.rows());
  std::vector<int> parent(m);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      if (distances(i, j) <= delta) {
        const int a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
  // Labels numbered by first appearance.
  std::vector<int> label(m, -1), root_label(m, -1);
  int next = 0;
  for (int i = 0; i < m; ++i) {
    const int r = find(i);
    if (root_label[r] < 0) root_label[r] = next++;
    label[i] = root_label[r];
  }
  return label;
}

ClusterReport multiplicity_probe(const GridPtr &grid, const Eigen::Ref<const Eigen::VectorXd> &f, double p, int n_starts,
                                 std::uint64_t seed, const ProbeOptions &options) {
  validate(grid, f, "multiplicity_probe");
  if (n_starts < 2) throw std::invalid_argument("multiplicity_probe: n_starts must be >= 2");
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("multiplicity_probe: p must lie in [0,1)");
  if (!(options.delta_cluster > 0.0)) throw std::invalid_argument("multiplicity_probe: delta_cluster must be positive");
  ClusterReport report;
  report.seed = seed;
  report.n_starts = n_starts;
  report.delta_cluster = options.delta_cluster;
  std::mt19937_64 rng(seed);
  const int n = grid->ambient_dim;
  const double c = std::pow(integrate(*grid, f) / sphere_area(n), 1.0 / (n - p));
  for (int s = 0; s < n_starts; ++s) {
    report.starts.push_back(random_even_start(grid, c, options.amplitude, options.max_degree, rng));
    try {
      const SolveReport r = solve_lp_minkowski(grid, f, p, report.starts.back(), options.solver);
      report.converged.push_back(true);
      report.failures.emplace_back();
      report.converged_index.push_back(s);
      report.solutions.push_back(r.solution);
    } catch (const SolverError &e) {
      report.converged.push_back(false);
      report.failures.emplace_back(std::string(to_string(e.kind)) + ": " + e.what());
    }
  }
  if (report.solutions.empty()) throw std::runtime_error("multiplicity_probe: all " + std::to_string(n_starts) + " starts failed");
  const Eigen::Index m = static_cast<Eigen::Index>(report.solutions.size());
  report.distances = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i + 1; j < m; ++j)
      report.distances(i, j) = report.distances(j, i) = hausdorff_distance_even(report.solutions[i], report.solutions[j]);
  report.cluster_of = cluster_labels(report.distances, options.delta_cluster);
  for (Eigen::Index i = 0; i < m; ++i)
    if (report.cluster_of[i] == static_cast<int>(report.representatives.size())) report.representatives.push_back(static_cast<int>(i));
  return report;
}

} // namespace lpbm
