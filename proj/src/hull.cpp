#include "lpbm/hull.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_map>

namespace lpbm {

namespace {

struct Face {
  int a, b, c;
  bool alive = true;
};

std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

// Beneath-beyond on fixed coordinates. Faces coplanar with the new point
// within rounding count as invisible. Returns false when the visible region
// is not a disk; the caller then retries on perturbed input.
bool hull_attempt(const Eigen::Matrix3Xd &pts, double scale, std::vector<Face> &out) {
  const int n = static_cast<int>(pts.cols());
  const double eps = 1e-12 * scale;
  auto orient = [&](int a, int b, int c, const Eigen::Vector3d &x) {
    return (pts.col(b) - pts.col(a)).cross(pts.col(c) - pts.col(a)).dot(x - pts.col(a));
  };

  int i0 = 0;
  for (int i = 1; i < n; ++i)
    if (pts(0, i) < pts(0, i0)) i0 = i;
  int i1 = i0;
  double best = -1;
  for (int i = 0; i < n; ++i) {
    const double d = (pts.col(i) - pts.col(i0)).squaredNorm();
    if (d > best) best = d, i1 = i;
  }
  if (best <= eps * eps) throw std::domain_error("convex_hull_3d: degenerate point set");
  const Eigen::Vector3d dir = (pts.col(i1) - pts.col(i0)).normalized();
  int i2 = i0;
  best = -1;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d r = pts.col(i) - pts.col(i0);
    const double d = (r - r.dot(dir) * dir).squaredNorm();
    if (d > best) best = d, i2 = i;
  }
  if (best <= eps * eps) throw std::domain_error("convex_hull_3d: collinear point set");
  const Eigen::Vector3d pn = (pts.col(i1) - pts.col(i0)).cross(pts.col(i2) - pts.col(i0)).normalized();
  int i3 = i0;
  best = -1;
  for (int i = 0; i < n; ++i) {
    const double d = std::abs(pn.dot(pts.col(i) - pts.col(i0)));
    if (d > best) best = d, i3 = i;
  }
  if (best <= eps) throw std::domain_error("convex_hull_3d: coplanar point set");

  const Eigen::Vector3d inner = 0.25 * (pts.col(i0) + pts.col(i1) + pts.col(i2) + pts.col(i3));
  std::vector<Face> faces;
  std::unordered_map<std::uint64_t, int> edge_face;
  auto link = [&](int a, int b, int c) {
    const int id = static_cast<int>(faces.size());
    faces.push_back({a, b, c});
    edge_face[edge_key(a, b)] = id;
    edge_face[edge_key(b, c)] = id;
    edge_face[edge_key(c, a)] = id;
  };
  auto add_initial = [&](int a, int b, int c) {
    if (orient(a, b, c, inner) > 0) std::swap(b, c);
    link(a, b, c);
  };
  add_initial(i0, i1, i2);
  add_initial(i0, i1, i3);
  add_initial(i0, i2, i3);
  add_initial(i1, i2, i3);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    return (pts.col(x) - inner).squaredNorm() > (pts.col(y) - inner).squaredNorm();
  });

  std::vector<int> visible;
  std::vector<char> is_visible;
  std::vector<std::pair<int, int>> horizon;
  for (int p : order) {
    if (p == i0 || p == i1 || p == i2 || p == i3) continue;
    const Eigen::Vector3d x = pts.col(p);
    is_visible.assign(faces.size(), 0);
    visible.clear();
    for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
      if (!faces[f].alive) continue;
      const double o = orient(faces[f].a, faces[f].b, faces[f].c, x);
      // Rounding bound of the orientation determinant; the coordinate
      // differences carry an absolute error proportional to scale.
      const double e1 = (pts.col(faces[f].b) - pts.col(faces[f].a)).norm();
      const double e2 = (pts.col(faces[f].c) - pts.col(faces[f].a)).norm();
      const double ex = (x - pts.col(faces[f].a)).norm();
      const double bound = 1e-14 * (e1 * e2 * ex + scale * ((e1 + e2) * ex + e1 * e2));
      if (o > bound) {
        is_visible[f] = 1;
        visible.push_back(f);
      }
    }
    if (visible.empty()) continue;
    horizon.clear();
    for (int f : visible) {
      const int v[3] = {faces[f].a, faces[f].b, faces[f].c};
      for (int k = 0; k < 3; ++k) {
        const int a = v[k], b = v[(k + 1) % 3];
        const auto it = edge_face.find(edge_key(b, a));
        if (it == edge_face.end()) return false;
        if (!is_visible[it->second]) horizon.emplace_back(a, b);
      }
    }
    // The horizon must be a single cycle.
    std::unordered_map<int, int> next;
    for (auto [a, b] : horizon) next[a] = b;
    if (next.size() != horizon.size()) return false;
    int steps = 0;
    for (int v = horizon.front().first; steps <= static_cast<int>(horizon.size());) {
      const auto it = next.find(v);
      if (it == next.end()) return false;
      v = it->second;
      ++steps;
      if (v == horizon.front().first) break;
    }
    if (steps != static_cast<int>(horizon.size())) return false;
    for (int f : visible) {
      faces[f].alive = false;
      edge_face.erase(edge_key(faces[f].a, faces[f].b));
      edge_face.erase(edge_key(faces[f].b, faces[f].c));
      edge_face.erase(edge_key(faces[f].c, faces[f].a));
    }
    for (auto [a, b] : horizon) {
      if ((pts.col(b) - pts.col(a)).cross(x - pts.col(a)).norm() <= 1e-14 * (pts.col(b) - pts.col(a)).norm() * (x - pts.col(a)).norm()) return false;
      link(a, b, p);
    }
  }
  out.clear();
  for (const Face &f : faces)
    if (f.alive) out.push_back(f);
  // Inconsistent coplanarity decisions can leave a dent; reject it.
  for (const Face &f : out) {
    const Eigen::Vector3d nrm = (pts.col(f.b) - pts.col(f.a)).cross(pts.col(f.c) - pts.col(f.a)).normalized();
    if (((nrm.transpose() * pts).array() - nrm.dot(pts.col(f.a))).maxCoeff() > 1e-10 * scale) return false;
  }
  return true;
}

} // namespace

Hull3 convex_hull_3d(const Eigen::Ref<const Eigen::Matrix3Xd> &points, double rel_eps) {
  const int n = static_cast<int>(points.cols());
  if (n < 4) throw std::domain_error("convex_hull_3d: fewer than 4 points");
  const double scale = std::max(points.colwise().norm().maxCoeff(), 1e-300);
  // Points closer than this are merged; the hull refers to the first copy.
  const double merge = rel_eps * scale;
  std::vector<int> keep;
  for (int j = 0; j < n; ++j) {
    bool dup = false;
    for (int k : keep)
      if ((points.col(j) - points.col(k)).norm() <= merge) {
        dup = true;
        break;
      }
    if (!dup) keep.push_back(j);
  }
  if (keep.size() < 4) throw std::domain_error("convex_hull_3d: degenerate point set");
  const int m = static_cast<int>(keep.size());
  Eigen::Matrix3Xd base(3, m);
  for (int j = 0; j < m; ++j) base.col(j) = points.col(keep[j]);

  Eigen::Matrix3Xd pts = base;
  std::vector<Face> faces;
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  // Degenerate input is joggled (seeded, so results are reproducible).
  double joggle = 1e-11;
  while (!hull_attempt(pts, scale, faces)) {
    if (joggle > 1e-6) throw std::domain_error("convex_hull_3d: input too degenerate");
    for (Eigen::Index k = 0; k < pts.size(); ++k) pts.data()[k] = base.data()[k] + joggle * scale * unit(rng);
    joggle *= 10.0;
  }
  Hull3 hull;
  for (const Face &f : faces) {
    hull.faces.emplace_back(keep[f.a], keep[f.b], keep[f.c]);
    // Planes come from the unperturbed points unless the face is a sliver there.
    Eigen::Vector3d nrm = (base.col(f.b) - base.col(f.a)).cross(base.col(f.c) - base.col(f.a));
    const Eigen::Vector3d jog = (pts.col(f.b) - pts.col(f.a)).cross(pts.col(f.c) - pts.col(f.a));
    if (nrm.norm() <= 1e-6 * jog.norm() || nrm.dot(jog) <= 0.0) nrm = jog;
    nrm.normalize();
    hull.normals.push_back(nrm);
    hull.offsets.push_back(nrm.dot(base.col(f.a)));
  }
  return hull;
}

std::vector<int> convex_hull_2d(const Eigen::Ref<const Eigen::Matrix2Xd> &pts) {
  const int n = static_cast<int>(pts.cols());
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return pts(0, a) < pts(0, b) || (pts(0, a) == pts(0, b) && pts(1, a) < pts(1, b));
  });
  const double scale = n ? pts.colwise().norm().maxCoeff() : 1.0;
  const double eps = 1e-14 * scale * scale;
  auto cross = [&](int o, int a, int b) {
    return (pts(0, a) - pts(0, o)) * (pts(1, b) - pts(1, o)) -
           (pts(1, a) - pts(1, o)) * (pts(0, b) - pts(0, o));
  };
  if (n < 3) return idx;
  std::vector<int> h(2 * n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], idx[i]) <= eps) --k;
    h[k++] = idx[i];
  }
  for (int i = n - 2, t = k + 1; i >= 0; --i) {
    while (k >= t && cross(h[k - 2], h[k - 1], idx[i]) <= eps) --k;
    h[k++] = idx[i];
  }
  h.resize(k - 1);
  return h;
}

} // namespace lpbm
