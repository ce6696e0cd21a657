#include "lpbm/bodies.hpp"
#include "lpbm/stencil.hpp"

#include <cmath>

namespace lpbm {

GridPtr make_grid(int ambient_dim, int resolution) {
  return std::make_shared<const SphereGrid>(build_grid(ambient_dim, resolution));
}

SupportField make_support_field(GridPtr grid, Eigen::VectorXd values) {
  if (!grid) throw std::invalid_argument("support field: null grid");
  if (values.size() != grid->size()) throw std::invalid_argument("support field: length mismatch");
  if (!values.allFinite()) throw std::invalid_argument("support field: non-finite values");
  if (values.minCoeff() <= 0.0) throw std::invalid_argument("support field: values must be positive");
  if (oddness(*grid, values) > 1e-12 * values.cwiseAbs().maxCoeff())
    throw std::invalid_argument("support field: values are not even");
  values = symmetrize(*grid, values);
  return SupportField{std::move(grid), std::move(values)};
}

namespace {

TangentField tangent_field(const SupportField &h) {
  return evaluate(tangent_stencil(*h.grid), fold(*h.grid, h.values));
}

void require_convex(const TangentField &W) {
  double margin = INFINITY;
  for (Eigen::Index j = 0; j < W.size(); ++j) margin = std::min(margin, W.min_eigenvalue(j));
  if (!(margin >= kConvexityMargin))
    throw ConvexityViolation("convexity violation: min eigenvalue of Hess h + h I is " + std::to_string(margin), margin);
}

} // namespace

DiscreteMeasure surface_area_measure(const SupportField &h) {
  const TangentField W = tangent_field(h);
  require_convex(W);
  const SphereGrid &grid = *h.grid;
  DiscreteMeasure out{h.grid, Eigen::VectorXd(grid.size())};
  const auto &pair = grid.pair_of();
  for (Eigen::Index i = 0; i < grid.size(); ++i) out.masses[i] = W.det(pair[i]) * grid.weights[i];
  return out;
}

DiscreteMeasure cone_volume_measure(const SupportField &h) {
  DiscreteMeasure out = surface_area_measure(h);
  out.masses = out.masses.cwiseProduct(h.values) / h.dim();
  return out;
}

DiscreteMeasure normalized_cone_measure(const SupportField &h) {
  DiscreteMeasure out = cone_volume_measure(h);
  const double total = out.total();
  if (!(total > 0.0)) throw std::domain_error("normalized_cone_measure: zero volume");
  out.masses /= total;
  return out;
}

double smooth_volume(const SupportField &h) { return cone_volume_measure(h).total(); }

double convexity_margin(const SupportField &h) {
  const TangentField W = tangent_field(h);
  double margin = INFINITY;
  for (Eigen::Index j = 0; j < W.size(); ++j) margin = std::min(margin, W.min_eigenvalue(j));
  return margin;
}

double c2_distance(const SupportField &h1, const SupportField &h2) {
  if (h1.grid != h2.grid) throw std::invalid_argument("c2_distance: grid mismatch");
  const Eigen::VectorXd diff = fold(*h1.grid, h1.values - h2.values);
  const TangentField W = evaluate(tangent_stencil(*h1.grid), diff);
  double worst = diff.cwiseAbs().maxCoeff();
  for (Eigen::Index j = 0; j < W.size(); ++j) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(W.matrix(j), Eigen::EigenvaluesOnly);
    worst = std::max(worst, eig.eigenvalues().cwiseAbs().maxCoeff());
  }
  return worst;
}

double hausdorff_distance_even(const SupportField &h1, const SupportField &h2) {
  if (h1.grid != h2.grid && (h1.grid->size() != h2.grid->size() || h1.grid->nodes != h2.grid->nodes))
    throw std::invalid_argument("hausdorff_distance_even: grid mismatch");
  return (h1.values - h2.values).cwiseAbs().maxCoeff();
}

AprioriReport a_priori_bound_check(const SupportField &h, const Eigen::Ref<const Eigen::VectorXd> &f, double p, double C1) {
  if (f.size() != h.values.size()) throw std::invalid_argument("a_priori_bound_check: length mismatch");
  if (!(C1 >= 1.0)) throw std::invalid_argument("a_priori_bound_check: C1 must be >= 1");
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("a_priori_bound_check: p out of range");
  if (f.minCoeff() < 1.0 / C1 || f.maxCoeff() > C1)
    throw std::invalid_argument("a_priori_bound_check: density outside [1/C1, C1]");
  AprioriReport r;
  r.min_h = h.values.minCoeff();
  r.max_h = h.values.maxCoeff();
  r.observed_constant = std::max(r.max_h, 1.0 / r.min_h);
  r.density_bound = C1;
  return r;
}

} // namespace lpbm
