#pragma once

#include "lpbm/grid.hpp"

#include <Eigen/Dense>

#include <memory>
#include <stdexcept>
#include <string>

namespace lpbm {

using GridPtr = std::shared_ptr<const SphereGrid>;

GridPtr make_grid(int ambient_dim, int resolution);

/// W = Hess h + h I lost positive definiteness somewhere on the grid.
struct ConvexityViolation : std::domain_error {
  double margin;
  ConvexityViolation(const std::string &what, double margin_)
      : std::domain_error(what), margin(margin_) {}
};

/// Eigenvalue floor for W before densities are evaluated.
inline constexpr double kConvexityMargin = 1e-8;

/// Even positive support-function samples h(node_i).
struct SupportField {
  GridPtr grid;
  Eigen::VectorXd values;

  int dim() const { return grid->ambient_dim; }
};

/// Validates positivity and finiteness; values that are even up to rounding
/// (1e-12 relative) are symmetrized, anything worse throws.
SupportField make_support_field(GridPtr grid, Eigen::VectorXd values);

/// Origin-symmetric polytope {z : normals^T z <= offsets}.
///
/// `facet_areas[k]` is the (n-1)-measure of the face cut by halfspace k
/// (zero when the halfspace is redundant). `vertices` are stored column-wise.
struct PolytopeBody {
  int dim = 0;
  Eigen::MatrixXd normals;
  Eigen::VectorXd offsets;
  Eigen::MatrixXd vertices;
  Eigen::VectorXd facet_areas;

  Eigen::Index halfspace_count() const { return normals.cols(); }
};

/// Intersection of halfspaces. The list must be closed under (u,c) -> (-u,c)
/// and all offsets positive; normals are normalized on entry.
PolytopeBody polytope_from_halfspaces(Eigen::MatrixXd normals, Eigen::VectorXd offsets);
/// conv(+-points).
PolytopeBody polytope_from_points(const Eigen::Ref<const Eigen::MatrixXd> &points);
PolytopeBody cube(int dim, double half_width = 1.0);
PolytopeBody cross_polytope(int dim, double radius = 1.0);
PolytopeBody scaled(const PolytopeBody &body, double factor);

/// h_K at arbitrary directions (columns).
Eigen::VectorXd support_values(const PolytopeBody &body, const Eigen::Ref<const Eigen::MatrixXd> &directions);
SupportField support_of_polytope(const PolytopeBody &body, const GridPtr &grid);

/// Wulff shape of positive values q at the given unit directions.
PolytopeBody wulff_shape(const Eigen::Ref<const Eigen::MatrixXd> &directions, const Eigen::Ref<const Eigen::VectorXd> &q);
PolytopeBody wulff_shape(const Eigen::Ref<const Eigen::VectorXd> &q, const SphereGrid &grid);

/// Power mean ((1-lambda) a^p + lambda b^p)^(1/p); p = 0 is the geometric mean.
double power_mean(double a, double b, double lambda, double p);

/// L_p combination restricted to grid normals (0 < p <= 1).
PolytopeBody lp_combination(const SupportField &hK, const SupportField &hL, double lambda, double p);
/// Geometric-mean (p = 0) combination restricted to grid normals.
PolytopeBody log_combination(const SupportField &hK, const SupportField &hL, double lambda);

/// Facet normals of K + L. For polytopes these carry every facet of
/// the L_p combination, so the overloads below are exact.
Eigen::MatrixXd minkowski_sum_normals(const PolytopeBody &K, const PolytopeBody &L);
PolytopeBody lp_combination(const PolytopeBody &K, const PolytopeBody &L, double lambda, double p);
PolytopeBody log_combination(const PolytopeBody &K, const PolytopeBody &L, double lambda);

/// (1/n) sum_k offset_k * facet_area_k.
double volume(const PolytopeBody &body);

/// Atoms on grid directions.
struct DiscreteMeasure {
  GridPtr grid;
  Eigen::VectorXd masses;

  double total() const { return masses.sum(); }
};

/// Atoms at facet normals of a polytope.
struct FacetMeasure {
  Eigen::MatrixXd directions;
  Eigen::VectorXd masses;
  Eigen::VectorXd offsets; // h_K at each direction

  double total() const { return masses.sum(); }
};

/// det(Hess h + h I)(x_i) * w_i. Throws ConvexityViolation below the margin.
DiscreteMeasure surface_area_measure(const SupportField &h);
/// (1/n) h_i * S_i.
DiscreteMeasure cone_volume_measure(const SupportField &h);
DiscreteMeasure normalized_cone_measure(const SupportField &h);

FacetMeasure surface_area_measure_poly(const PolytopeBody &body);
FacetMeasure cone_volume_measure_poly(const PolytopeBody &body);
FacetMeasure normalized_cone_measure_poly(const PolytopeBody &body);

/// Volume functional of a smooth field, (1/n) sum h_i det(W_i) w_i.
double smooth_volume(const SupportField &h);

/// Smallest eigenvalue of Hess h + h I over the grid.
double convexity_margin(const SupportField &h);

/// Discrete C^2 distance max(sup|h1 - h2|, sup ||W(h1) - W(h2)||_2).
double c2_distance(const SupportField &h1, const SupportField &h2);

/// Origin-centred ellipsoid sum_i r_i^2 e_i e_i^T; axes are columns.
struct Ellipsoid {
  Eigen::MatrixXd axes;
  Eigen::VectorXd radii;

  Eigen::MatrixXd shape() const; // Q with h_E(x) = sqrt(x^T Q x)
  double support(const Eigen::Ref<const Eigen::VectorXd> &x) const;
  double volume() const;
};

struct JohnResult {
  Ellipsoid ellipsoid;
  int iterations = 0;
  /// max_k h_E(u_k)/c_k over facets; <= 1 certifies E in K.
  double containment = 0.0;
  /// Smallest t with K in tE (max over vertices of the E-norm).
  double sandwich_ratio = 0.0;
  bool within_sqrt_n = false;
  bool within_n_three_halves = false;
};

/// Maximum-volume origin-centred ellipsoid inside a symmetric polytope
/// (log-det barrier path following on the shape matrix).
JohnResult john_ellipsoid(const PolytopeBody &body);

double hausdorff_distance_even(const SupportField &h1, const SupportField &h2);

struct AprioriReport {
  double min_h = 0.0;
  double max_h = 0.0;
  /// max(max h, 1 / min h).
  double observed_constant = 0.0;
  double density_bound = 0.0;
};

AprioriReport a_priori_bound_check(const SupportField &h, const Eigen::Ref<const Eigen::VectorXd> &f, double p, double C1);

} // namespace lpbm
