#pragma once

#include <Eigen/Dense>

#include <vector>

namespace lpbm {

/// Triangulated 3-D convex hull. Faces are CCW seen from outside; each face
/// carries its outward unit normal and plane offset (normal . x = offset).
struct Hull3 {
  std::vector<Eigen::Vector3i> faces;
  std::vector<Eigen::Vector3d> normals;
  std::vector<double> offsets;
};

/// Incremental (beneath-beyond) hull. Points closer than `rel_eps * scale`
/// to a face plane count as lying on it, so coplanar input is tolerated.
/// Throws std::domain_error when the points do not span a 3-D volume.
Hull3 convex_hull_3d(const Eigen::Ref<const Eigen::Matrix3Xd> &points, double rel_eps = 1e-12);

/// CCW hull vertex indices (monotone chain). Collinear points are dropped.
std::vector<int> convex_hull_2d(const Eigen::Ref<const Eigen::Matrix2Xd> &points);

} // namespace lpbm
