#pragma once

#include <Eigen/Dense>

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace lpbm {

struct StencilCache;

/// Quadrature grid on S^{n-1}, n in {2,3}, closed under x -> -x.
///
/// Nodes are stored column-wise. `antipode[i]` is the index of -node(i); the
/// pairing is exact (the second node of each pair is the bitwise negation of
/// the first). Weights are antipode-invariant, so odd integrands integrate
/// to zero up to rounding.
struct SphereGrid {
  int ambient_dim = 0;
  int resolution = 0;
  Eigen::MatrixXd nodes;     // ambient_dim x N
  Eigen::VectorXd weights;   // N
  std::vector<int> antipode; // N
  /// Triangles of the underlying mesh (n = 3 only), indices into nodes.
  std::vector<Eigen::Vector3i> triangles;

  Eigen::Index size() const { return nodes.cols(); }
  Eigen::Index pair_count() const { return nodes.cols() / 2; }
  auto node(Eigen::Index i) const { return nodes.col(i); }

  /// Representative node of each antipodal pair (the smaller index).
  const std::vector<int> &representatives() const { return reps_; }
  /// Pair index of each node.
  const std::vector<int> &pair_of() const { return pair_of_; }

  /// Builds the pair tables and an empty derivative-stencil cache.
  void finalize_pairs();

  std::shared_ptr<StencilCache> stencil_cache;

private:
  std::vector<int> reps_;
  std::vector<int> pair_of_;
};

/// |S^{n-1}|.
double sphere_area(int ambient_dim);

SphereGrid build_grid(int ambient_dim, int resolution);

template <typename Derived>
double integrate(const SphereGrid &grid, const Eigen::MatrixBase<Derived> &values) {
  if (values.size() != grid.size())
    throw std::invalid_argument("integrate: length mismatch");
  if (!values.allFinite())
    throw std::invalid_argument("integrate: non-finite values");
  return grid.weights.dot(values.template cast<double>());
}

/// Even part: (v + v o sigma) / 2.
Eigen::VectorXd symmetrize(const SphereGrid &grid, const Eigen::Ref<const Eigen::VectorXd> &values);

/// Largest |v_i - v_{sigma(i)}|.
double oddness(const SphereGrid &grid, const Eigen::Ref<const Eigen::VectorXd> &values);

/// Node values -> one value per antipodal pair (taken at the representative).
Eigen::VectorXd fold(const SphereGrid &grid, const Eigen::Ref<const Eigen::VectorXd> &values);
/// Pair values -> even node values.
Eigen::VectorXd unfold(const SphereGrid &grid, const Eigen::Ref<const Eigen::VectorXd> &pair_values);

/// Evaluate f(x) at every node.
template <typename F>
Eigen::VectorXd sample(const SphereGrid &grid, F &&f) {
  Eigen::VectorXd out(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) out[i] = f(Eigen::VectorXd(grid.node(i)));
  return out;
}

/// Angle of node i (n = 2 only).
double node_angle(const SphereGrid &grid, Eigen::Index i);

} // namespace lpbm
