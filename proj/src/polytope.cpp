#include "lpbm/bodies.hpp"
#include "lpbm/hull.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <unordered_map>

namespace lpbm {

namespace {

void require_positive(const Eigen::Ref<const Eigen::VectorXd> &q, const char *who) {
  for (Eigen::Index i = 0; i < q.size(); ++i)
    if (!(q[i] > 0.0) || !std::isfinite(q[i]))
      throw std::invalid_argument(std::string(who) + ": values must be positive and finite");
}

double cross2(const Eigen::Vector2d &a, const Eigen::Vector2d &b) { return a.x() * b.y() - a.y() * b.x(); }

PolytopeBody wulff_2d(const Eigen::MatrixXd &U, const Eigen::VectorXd &q) {
  const Eigen::Index m = U.cols();
  std::vector<double> theta(m);
  for (Eigen::Index k = 0; k < m; ++k) theta[k] = std::atan2(U(1, k), U(0, k));
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return theta[a] < theta[b]; });

  // Equal directions: only the smallest offset can be active.
  constexpr double same = 1e-14;
  std::vector<int> dirs;
  for (int k : order) {
    if (!dirs.empty() && theta[k] - theta[dirs.back()] <= same) {
      if (q[k] < q[dirs.back()]) dirs.back() = k;
      continue;
    }
    dirs.push_back(k);
  }
  if (dirs.size() > 1 && theta[dirs.front()] + 2.0 * std::numbers::pi - theta[dirs.back()] <= same) {
    if (q[dirs.back()] < q[dirs.front()]) dirs.front() = dirs.back();
    dirs.pop_back();
  }
  if (dirs.size() < 3) throw std::domain_error("wulff_shape: unbounded intersection");

  std::vector<Eigen::Vector2d> y(m);
  double scale = 0.0;
  for (int k : dirs) {
    y[k] = U.col(k) / q[k];
    scale = std::max(scale, y[k].norm());
  }
  // Graham scan around the origin, starting from a dual point that is surely
  // on the hull (largest norm).
  const auto start = std::max_element(dirs.begin(), dirs.end(),
                                      [&](int a, int b) { return y[a].squaredNorm() < y[b].squaredNorm(); });
  std::rotate(dirs.begin(), start, dirs.end());
  const double eps = 1e-13 * scale * scale;
  auto turns_left = [&](int a, int b, int c) { return cross2(y[b] - y[a], y[c] - y[b]) > eps; };
  std::vector<int> hull{dirs[0]};
  for (std::size_t j = 1; j < dirs.size(); ++j) {
    while (hull.size() >= 2 && !turns_left(hull[hull.size() - 2], hull.back(), dirs[j])) hull.pop_back();
    hull.push_back(dirs[j]);
  }
  while (hull.size() >= 3 && !turns_left(hull[hull.size() - 2], hull.back(), hull[0])) hull.pop_back();
  if (hull.size() < 3) throw std::domain_error("wulff_shape: unbounded intersection");

  const std::size_t r = hull.size();
  std::vector<Eigen::Vector2d> verts(r); // verts[j] joins facets hull[j] and hull[j+1]
  for (std::size_t j = 0; j < r; ++j) {
    const int a = hull[j], b = hull[(j + 1) % r];
    Eigen::Matrix2d A;
    A.row(0) = U.col(a).transpose();
    A.row(1) = U.col(b).transpose();
    if (cross2(U.col(a), U.col(b)) <= 1e-15) throw std::domain_error("wulff_shape: unbounded intersection");
    verts[j] = A.partialPivLu().solve(Eigen::Vector2d(q[a], q[b]));
  }
  PolytopeBody body;
  body.dim = 2;
  body.normals = U;
  body.offsets = q;
  body.facet_areas = Eigen::VectorXd::Zero(m);
  body.vertices.resize(2, static_cast<Eigen::Index>(r));
  for (std::size_t j = 0; j < r; ++j) {
    body.vertices.col(static_cast<Eigen::Index>(j)) = verts[j];
    body.facet_areas[hull[j]] = (verts[j] - verts[(j + r - 1) % r]).norm();
  }
  return body;
}

PolytopeBody wulff_3d(const Eigen::MatrixXd &U, const Eigen::VectorXd &q) {
  const Eigen::Index m = U.cols();
  Eigen::Matrix3Xd y(3, m);
  for (Eigen::Index k = 0; k < m; ++k) y.col(k) = U.col(k) / q[k];
  Hull3 hull;
  try {
    hull = convex_hull_3d(y);
  } catch (const std::domain_error &) {
    throw std::domain_error("wulff_shape: unbounded intersection");
  }
  const double scale = y.colwise().norm().maxCoeff();
  const std::size_t F = hull.faces.size();
  for (double c : hull.offsets)
    if (c <= 1e-12 * scale) throw std::domain_error("wulff_shape: unbounded intersection");

  PolytopeBody body;
  body.dim = 3;
  body.normals = U;
  body.offsets = q;
  body.vertices.resize(3, static_cast<Eigen::Index>(F));
  for (std::size_t f = 0; f < F; ++f) body.vertices.col(static_cast<Eigen::Index>(f)) = hull.normals[f] / hull.offsets[f];

  // Directed edge (a,b) -> face; the faces around a dual vertex form the
  // polygon of its Wulff facet.
  std::unordered_map<std::uint64_t, int> edge_face;
  std::vector<int> some_face(m, -1);
  auto key = [](int a, int b) { return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b); };
  for (std::size_t f = 0; f < F; ++f)
    for (int e = 0; e < 3; ++e) {
      const int a = hull.faces[f][e], b = hull.faces[f][(e + 1) % 3];
      edge_face[key(a, b)] = static_cast<int>(f);
      some_face[a] = static_cast<int>(f);
    }
  body.facet_areas = Eigen::VectorXd::Zero(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    if (some_face[k] < 0) continue;
    Eigen::Vector3d area = Eigen::Vector3d::Zero();
    int f = some_face[k];
    std::size_t steps = 0;
    do {
      const auto &tri = hull.faces[f];
      const int at = tri[0] == k ? 0 : tri[1] == k ? 1 : 2;
      const int next = tri[(at + 2) % 3]; // edge k -> next belongs to the neighbouring face
      const int g = edge_face.at(key(static_cast<int>(k), next));
      area += Eigen::Vector3d(body.vertices.col(f)).cross(Eigen::Vector3d(body.vertices.col(g)));
      f = g;
      if (++steps > F) throw std::logic_error("wulff_shape: broken hull adjacency");
    } while (f != some_face[k]);
    body.facet_areas[k] = 0.5 * std::abs(area.dot(U.col(k)));
  }
  return body;
}

void require_symmetric(const Eigen::MatrixXd &U, const Eigen::VectorXd &c) {
  const Eigen::Index m = U.cols();
  for (Eigen::Index k = 0; k < m; ++k) {
    bool found = false;
    for (Eigen::Index j = 0; j < m && !found; ++j)
      found = (U.col(j) + U.col(k)).norm() <= 1e-12 && std::abs(c[j] - c[k]) <= 1e-12 * c[k];
    if (!found) throw std::invalid_argument("polytope: halfspace list is not origin-symmetric");
  }
}

} // namespace

PolytopeBody wulff_shape(const Eigen::Ref<const Eigen::MatrixXd> &directions, const Eigen::Ref<const Eigen::VectorXd> &q) {
  if (directions.cols() != q.size()) throw std::invalid_argument("wulff_shape: length mismatch");
  require_positive(q, "wulff_shape");
  const auto dim = directions.rows();
  if (dim == 2) return wulff_2d(directions, q);
  if (dim == 3) return wulff_3d(directions, q);
  throw std::invalid_argument("wulff_shape: unsupported dimension");
}

PolytopeBody wulff_shape(const Eigen::Ref<const Eigen::VectorXd> &q, const SphereGrid &grid) {
  if (q.size() != grid.size()) throw std::invalid_argument("wulff_shape: length mismatch");
  return wulff_shape(grid.nodes, q);
}

PolytopeBody polytope_from_halfspaces(Eigen::MatrixXd normals, Eigen::VectorXd offsets) {
  if (normals.cols() != offsets.size()) throw std::invalid_argument("polytope: length mismatch");
  if (normals.rows() != 2 && normals.rows() != 3) throw std::invalid_argument("polytope: unsupported dimension");
  require_positive(offsets, "polytope");
  for (Eigen::Index k = 0; k < normals.cols(); ++k) {
    const double len = normals.col(k).norm();
    if (!(len > 0.0)) throw std::invalid_argument("polytope: zero normal");
    normals.col(k) /= len;
    offsets[k] /= len;
  }
  require_symmetric(normals, offsets);
  return wulff_shape(normals, offsets);
}

PolytopeBody polytope_from_points(const Eigen::Ref<const Eigen::MatrixXd> &points) {
  const auto dim = points.rows();
  const auto m = points.cols();
  Eigen::MatrixXd sym(dim, 2 * m);
  sym << points, -points;
  std::vector<Eigen::VectorXd> normals;
  std::vector<double> offsets;
  if (dim == 2) {
    const auto idx = convex_hull_2d(sym);
    if (idx.size() < 3) throw std::domain_error("polytope: points do not span the plane");
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const Eigen::Vector2d a = sym.col(idx[j]), b = sym.col(idx[(j + 1) % idx.size()]);
      const Eigen::Vector2d u = Eigen::Vector2d(b.y() - a.y(), a.x() - b.x()).normalized();
      normals.push_back(u);
      offsets.push_back(u.dot(a));
    }
  } else if (dim == 3) {
    const Hull3 hull = convex_hull_3d(sym);
    for (std::size_t f = 0; f < hull.faces.size(); ++f) {
      normals.push_back(hull.normals[f]);
      offsets.push_back(hull.offsets[f]);
    }
  } else {
    throw std::invalid_argument("polytope: unsupported dimension");
  }
  Eigen::MatrixXd U(dim, static_cast<Eigen::Index>(normals.size()));
  Eigen::VectorXd c(U.cols());
  for (Eigen::Index k = 0; k < U.cols(); ++k) {
    U.col(k) = normals[k];
    c[k] = offsets[k];
  }
  return wulff_shape(U, c);
}

PolytopeBody cube(int dim, double half_width) {
  Eigen::MatrixXd U(dim, 2 * dim);
  U << Eigen::MatrixXd::Identity(dim, dim), -Eigen::MatrixXd::Identity(dim, dim);
  return polytope_from_halfspaces(U, Eigen::VectorXd::Constant(2 * dim, half_width));
}

PolytopeBody cross_polytope(int dim, double radius) {
  Eigen::MatrixXd P = radius * Eigen::MatrixXd::Identity(dim, dim);
  return polytope_from_points(P);
}

PolytopeBody scaled(const PolytopeBody &body, double factor) {
  if (!(factor > 0.0)) throw std::invalid_argument("scaled: factor must be positive");
  PolytopeBody out = body;
  out.offsets *= factor;
  out.vertices *= factor;
  out.facet_areas *= std::pow(factor, body.dim - 1);
  return out;
}

Eigen::VectorXd support_values(const PolytopeBody &body, const Eigen::Ref<const Eigen::MatrixXd> &directions) {
  if (directions.rows() != body.dim) throw std::invalid_argument("support_values: dimension mismatch");
  if (body.vertices.cols() == 0) throw std::domain_error("support_values: unbounded body");
  return (body.vertices.transpose() * directions).colwise().maxCoeff().transpose();
}

SupportField support_of_polytope(const PolytopeBody &body, const GridPtr &grid) {
  if (!grid || grid->ambient_dim != body.dim) throw std::invalid_argument("support_of_polytope: dimension mismatch");
  return make_support_field(grid, symmetrize(*grid, support_values(body, grid->nodes)));
}

double power_mean(double a, double b, double lambda, double p) {
  if (lambda == 0.0) return a;
  if (lambda == 1.0) return b;
  if (p == 0.0) return std::exp((1.0 - lambda) * std::log(a) + lambda * std::log(b));
  return std::pow((1.0 - lambda) * std::pow(a, p) + lambda * std::pow(b, p), 1.0 / p);
}

namespace {

void check_combination_args(double lambda, double p, bool allow_zero) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("combination: lambda must lie in [0,1]");
  if (allow_zero ? !(p >= 0.0 && p <= 1.0) : !(p > 0.0 && p <= 1.0))
    throw std::invalid_argument("combination: p out of range");
}

PolytopeBody combine_fields(const SupportField &hK, const SupportField &hL, double lambda, double p) {
  if (hK.grid != hL.grid) throw std::invalid_argument("combination: grid mismatch");
  Eigen::VectorXd q(hK.values.size());
  for (Eigen::Index i = 0; i < q.size(); ++i) q[i] = power_mean(hK.values[i], hL.values[i], lambda, p);
  return wulff_shape(q, *hK.grid);
}

PolytopeBody combine_bodies(const PolytopeBody &K, const PolytopeBody &L, double lambda, double p) {
  if (K.dim != L.dim) throw std::invalid_argument("combination: dimension mismatch");
  const Eigen::MatrixXd U = minkowski_sum_normals(K, L);
  const Eigen::VectorXd a = support_values(K, U), b = support_values(L, U);
  Eigen::VectorXd q(U.cols());
  for (Eigen::Index j = 0; j < q.size(); ++j) q[j] = power_mean(a[j], b[j], lambda, p);
  return wulff_shape(U, q);
}

} // namespace

PolytopeBody lp_combination(const SupportField &hK, const SupportField &hL, double lambda, double p) {
  check_combination_args(lambda, p, false);
  return combine_fields(hK, hL, lambda, p);
}

PolytopeBody log_combination(const SupportField &hK, const SupportField &hL, double lambda) {
  check_combination_args(lambda, 0.0, true);
  return combine_fields(hK, hL, lambda, 0.0);
}

Eigen::MatrixXd minkowski_sum_normals(const PolytopeBody &K, const PolytopeBody &L) {
  if (K.dim != L.dim) throw std::invalid_argument("minkowski_sum_normals: dimension mismatch");
  const auto nk = K.vertices.cols(), nl = L.vertices.cols();
  Eigen::MatrixXd sums(K.dim, nk * nl);
  for (Eigen::Index i = 0; i < nk; ++i)
    for (Eigen::Index j = 0; j < nl; ++j) sums.col(i * nl + j) = K.vertices.col(i) + L.vertices.col(j);
  if (K.dim == 2) {
    const auto idx = convex_hull_2d(sums);
    Eigen::MatrixXd U(2, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const Eigen::Vector2d a = sums.col(idx[j]), b = sums.col(idx[(j + 1) % idx.size()]);
      U.col(static_cast<Eigen::Index>(j)) = Eigen::Vector2d(b.y() - a.y(), a.x() - b.x()).normalized();
    }
    return U;
  }
  const Hull3 hull = convex_hull_3d(sums);
  Eigen::MatrixXd U(3, static_cast<Eigen::Index>(hull.normals.size()));
  for (std::size_t f = 0; f < hull.normals.size(); ++f) U.col(static_cast<Eigen::Index>(f)) = hull.normals[f];
  return U;
}

PolytopeBody lp_combination(const PolytopeBody &K, const PolytopeBody &L, double lambda, double p) {
  check_combination_args(lambda, p, false);
  return combine_bodies(K, L, lambda, p);
}

PolytopeBody log_combination(const PolytopeBody &K, const PolytopeBody &L, double lambda) {
  check_combination_args(lambda, 0.0, true);
  return combine_bodies(K, L, lambda, 0.0);
}

double volume(const PolytopeBody &body) {
  if (body.facet_areas.size() != body.offsets.size() || body.dim == 0)
    throw std::domain_error("volume: degenerate body");
  const double v = body.offsets.dot(body.facet_areas) / body.dim;
  if (!(v > 0.0)) throw std::domain_error("volume: degenerate body");
  return v;
}

namespace {

FacetMeasure facet_measure(const PolytopeBody &body, bool cone) {
  std::vector<Eigen::Index> active;
  for (Eigen::Index k = 0; k < body.facet_areas.size(); ++k)
    if (body.facet_areas[k] > 0.0) active.push_back(k);
  FacetMeasure out;
  out.directions.resize(body.dim, static_cast<Eigen::Index>(active.size()));
  out.masses.resize(out.directions.cols());
  out.offsets.resize(out.directions.cols());
  for (std::size_t j = 0; j < active.size(); ++j) {
    const auto k = active[j];
    const auto jj = static_cast<Eigen::Index>(j);
    out.directions.col(jj) = body.normals.col(k);
    out.offsets[jj] = body.offsets[k];
    out.masses[jj] = cone ? body.offsets[k] * body.facet_areas[k] / body.dim : body.facet_areas[k];
  }
  return out;
}

} // namespace

FacetMeasure surface_area_measure_poly(const PolytopeBody &body) { return facet_measure(body, false); }

FacetMeasure cone_volume_measure_poly(const PolytopeBody &body) { return facet_measure(body, true); }

FacetMeasure normalized_cone_measure_poly(const PolytopeBody &body) {
  FacetMeasure out = facet_measure(body, true);
  out.masses /= volume(body);
  return out;
}

Eigen::MatrixXd Ellipsoid::shape() const { return axes * radii.array().square().matrix().asDiagonal() * axes.transpose(); }

double Ellipsoid::support(const Eigen::Ref<const Eigen::VectorXd> &x) const {
  return (radii.asDiagonal() * (axes.transpose() * x)).norm();
}

double Ellipsoid::volume() const {
  const double unit = radii.size() == 2 ? std::numbers::pi : 4.0 * std::numbers::pi / 3.0;
  return unit * radii.prod();
}

JohnResult john_ellipsoid(const PolytopeBody &body) {
  const int n = body.dim;
  // One constraint per active facet: u^T Q u <= c^2 (h_E(u) <= h_K(u)).
  const FacetMeasure facets = surface_area_measure_poly(body);
  const Eigen::Index m = facets.directions.cols();
  if (m < n + 1) throw std::domain_error("john_ellipsoid: degenerate body");
  for (Eigen::Index k = 0; k < m; ++k) {
    bool found = false;
    for (Eigen::Index j = 0; j < m && !found; ++j)
      found = (facets.directions.col(j) + facets.directions.col(k)).norm() <= 1e-9 &&
              std::abs(facets.offsets[j] - facets.offsets[k]) <= 1e-9 * facets.offsets[k];
    if (!found) throw std::invalid_argument("john_ellipsoid: asymmetric input");
  }

  std::vector<Eigen::MatrixXd> basis;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
      B(i, j) = B(j, i) = 1.0;
      basis.push_back(B);
    }
  const int T = static_cast<int>(basis.size());
  Eigen::MatrixXd A(m, T); // A(k,t) = u_k^T B_t u_k
  for (Eigen::Index k = 0; k < m; ++k)
    for (int t = 0; t < T; ++t) A(k, t) = facets.directions.col(k).dot(basis[t] * facets.directions.col(k));
  const Eigen::VectorXd c2 = facets.offsets.array().square();

  auto to_matrix = [&](const Eigen::VectorXd &x) {
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
    for (int t = 0; t < T; ++t) Q += x[t] * basis[t];
    return Q;
  };
  auto barrier = [&](const Eigen::VectorXd &x, double mu, double &value) {
    const Eigen::VectorXd s = c2 - A * x;
    if ((s.array() <= 0.0).any()) return false;
    Eigen::LLT<Eigen::MatrixXd> llt(to_matrix(x));
    if (llt.info() != Eigen::Success) return false;
    const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    value = -logdet - mu * s.array().log().sum();
    return true;
  };

  Eigen::VectorXd x = Eigen::VectorXd::Zero(T);
  const double start = 0.5 * c2.minCoeff();
  for (int i = 0, t = 0; i < n; ++i)
    for (int j = i; j < n; ++j, ++t)
      if (i == j) x[t] = start;

  JohnResult result;
  double mu = 1.0;
  while (true) {
    for (int inner = 0; inner < 100; ++inner) {
      const Eigen::MatrixXd Qi = to_matrix(x).inverse();
      const Eigen::VectorXd s = c2 - A * x;
      Eigen::VectorXd g(T);
      Eigen::MatrixXd H(T, T);
      const Eigen::ArrayXd inv_s = s.array().inverse();
      std::vector<Eigen::MatrixXd> QB(T);
      for (int t = 0; t < T; ++t) QB[t] = Qi * basis[t];
      for (int t = 0; t < T; ++t) {
        g[t] = -QB[t].trace() + mu * (A.col(t).array() * inv_s).sum();
        for (int r = t; r < T; ++r)
          H(t, r) = H(r, t) = (QB[t] * QB[r]).trace() + mu * (A.col(t).array() * A.col(r).array() * inv_s.square()).sum();
      }
      const Eigen::VectorXd dx = -H.ldlt().solve(g);
      const double decrement = -g.dot(dx);
      ++result.iterations;
      if (decrement < 1e-20) break;
      double f0 = 0.0, f1 = 0.0;
      barrier(x, mu, f0);
      double alpha = 1.0;
      while (alpha > 1e-12 && !(barrier(x + alpha * dx, mu, f1) && f1 <= f0 - 0.25 * alpha * decrement)) alpha *= 0.5;
      if (alpha <= 1e-12) break;
      x += alpha * dx;
      if (decrement < 1e-18) break;
    }
    // m * mu bounds the gap in log det.
    if (static_cast<double>(m) * mu < 1e-15) break;
    mu *= 0.1;
    if (result.iterations > 5000) throw std::runtime_error("john_ellipsoid: optimization failure");
  }

  const Eigen::MatrixXd Q = to_matrix(x);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Q);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0)
    throw std::runtime_error("john_ellipsoid: optimization failure");
  result.ellipsoid.radii = eig.eigenvalues().reverse().cwiseSqrt();
  result.ellipsoid.axes = eig.eigenvectors().rowwise().reverse();

  result.containment = 0.0;
  for (Eigen::Index k = 0; k < m; ++k)
    result.containment = std::max(result.containment, std::sqrt(A.row(k).dot(x)) / facets.offsets[k]);
  // K in tE iff every vertex has ||v||_E <= t.
  const Eigen::MatrixXd Qi = Q.inverse();
  for (Eigen::Index v = 0; v < body.vertices.cols(); ++v)
    result.sandwich_ratio =
        std::max(result.sandwich_ratio, std::sqrt(body.vertices.col(v).dot(Qi * body.vertices.col(v))));
  result.within_sqrt_n = result.sandwich_ratio <= std::sqrt(static_cast<double>(n)) * (1.0 + 1e-9);
  result.within_n_three_halves = result.sandwich_ratio <= std::pow(n, 1.5) * (1.0 + 1e-9);
  return result;
}

} // namespace lpbm
