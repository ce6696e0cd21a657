#pragma once

#include "lpbm/grid.hpp"

#include <Eigen/Sparse>

#include <memory>
#include <vector>

namespace lpbm {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Local polynomial fit parameters for the n = 3 chart stencils.
struct FitOptions {
  int degree = 0;    // 0: pick from the grid size
  int neighbors = 0; // 0: pick from the degree
};

/// Chart on the tangent hyperplane {y : y . axis = 1} with axis = +-e_k.
/// A node x maps to z = T^T x / (x . axis); u(z) = sqrt(1 + |z|^2) h(x).
struct ChartStencil {
  int chart = 0; // axis index k = chart / 2, sign = (chart % 2) ? +1 : -1
  Eigen::VectorXd axis;
  Eigen::MatrixXd tangent; // n x (n-1)
  /// Nodes inside the chart domain (x . axis >= min_cos) carrying a fit.
  std::vector<int> nodes;
  Eigen::MatrixXd z; // (n-1) x nodes.size()
  struct NodeFit {
    std::vector<int> neighbors;
    Eigen::MatrixXd grad;    // (n-1) x k: D htilde = grad * (h_nb - h_i)
    Eigen::MatrixXd hessian; // (n-1)^2 x k, column-major entries of D^2 htilde
  };
  std::vector<NodeFit> fits;
};

/// u, Du, D^2u of a support function restricted to one chart.
struct ChartSamples {
  std::vector<int> nodes;
  Eigen::MatrixXd z;
  Eigen::VectorXd u;
  Eigen::MatrixXd du;
  std::vector<Eigen::MatrixXd> d2u;
};

int chart_count(int ambient_dim);
/// Chart whose axis has the largest |x . axis|.
int owning_chart(const Eigen::Ref<const Eigen::VectorXd> &x);

ChartStencil build_chart(const SphereGrid &grid, int chart, FitOptions options = {}, double min_cos = 0.3);
ChartSamples chart_transfer(const Eigen::Ref<const Eigen::VectorXd> &h, const ChartStencil &chart);

/// Linear map from even support values (one per antipodal pair) to the
/// tangent matrix W = Hess h + h I at each pair representative, expressed in
/// an orthonormal tangent frame. For n = 2, W = h'' + h via spectral
/// differentiation; for n = 3 each representative uses its owning chart.
struct TangentStencil {
  int tangent_dim = 0;
  /// Component maps: n = 2 -> {W00}; n = 3 -> {W00, W01, W11}.
  std::vector<SparseRowMatrix> components;
  std::vector<int> owner_chart;
  FitOptions fit;
};

TangentStencil build_tangent_stencil(const SphereGrid &grid, FitOptions options = {});

/// Replace the grid's stencil cache with one using `options`.
void set_fit_options(SphereGrid &grid, FitOptions options);

/// Stencil cached on the grid (built once, on first use).
const TangentStencil &tangent_stencil(const SphereGrid &grid);

/// Spectral second-derivative matrix on the uniform circle grid of size N.
Eigen::MatrixXd spectral_second_derivative(int n);

/// W evaluated at every pair: one row per pair, columns as in `components`.
struct TangentField {
  int tangent_dim = 0;
  Eigen::MatrixXd entries; // pairs x components

  Eigen::Index size() const { return entries.rows(); }
  double det(Eigen::Index j) const;
  double min_eigenvalue(Eigen::Index j) const;
  /// Cofactor weights c with d(det W) = sum_c c_c dW_c.
  Eigen::RowVectorXd cofactor(Eigen::Index j) const;
  Eigen::MatrixXd matrix(Eigen::Index j) const;
};

TangentField evaluate(const TangentStencil &stencil, const Eigen::Ref<const Eigen::VectorXd> &pair_values);

/// Assemble sum_c diag(weights.col(c)) * components[c].
SparseRowMatrix contract(const TangentStencil &stencil, const Eigen::Ref<const Eigen::MatrixXd> &weights);

} // namespace lpbm
