#include "lpbm/grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>

namespace lpbm {

std::shared_ptr<StencilCache> make_stencil_cache();

namespace {

using Key = std::array<int, 6>; // (vertex, weight) x 3, sorted by vertex, -1 padded

Key make_key(std::array<std::pair<int, int>, 3> parts) {
  std::sort(parts.begin(), parts.end());
  Key key;
  key.fill(-1);
  int k = 0;
  for (auto [v, w] : parts) {
    if (w == 0) continue;
    key[2 * k] = v;
    key[2 * k + 1] = w;
    ++k;
  }
  return key;
}

double spherical_triangle_area(const Eigen::Vector3d &a, const Eigen::Vector3d &b,
                               const Eigen::Vector3d &c) {
  const double triple = std::abs(a.dot(b.cross(c)));
  const double denom = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
  return 2.0 * std::atan2(triple, denom);
}

// Exact integral of x^a y^b z^c over S^2.
double monomial_integral(int a, int b, int c) {
  if (a % 2 || b % 2 || c % 2) return 0.0;
  return 2.0 * std::tgamma((a + 1) / 2.0) * std::tgamma((b + 1) / 2.0) * std::tgamma((c + 1) / 2.0) /
         std::tgamma((a + b + c + 3) / 2.0);
}

// Smallest weighted change to the dual-cell weights that integrates every
// even polynomial of degree <= L exactly. Homogeneous degree-L monomials span
// that space on the sphere. The change is even, so pairing is kept.
void correct_moments(SphereGrid &g) {
  const Eigen::Index n = g.size();
  int degree = 16;
  while (degree > 2 && (degree + 1) * (degree + 2) / 2 > n / 4) degree -= 2;
  for (; degree >= 2; degree -= 2) {
    const int m = (degree + 1) * (degree + 2) / 2;
    Eigen::MatrixXd M(n, m);
    Eigen::VectorXd exact(m);
    int t = 0;
    for (int a = 0; a <= degree; ++a)
      for (int b = 0; a + b <= degree; ++b, ++t) {
        const int c = degree - a - b;
        exact[t] = monomial_integral(a, b, c);
        for (Eigen::Index i = 0; i < n; ++i)
          M(i, t) = std::pow(g.nodes(0, i), a) * std::pow(g.nodes(1, i), b) * std::pow(g.nodes(2, i), c);
      }
    const Eigen::MatrixXd A = g.weights.cwiseSqrt().asDiagonal() * M;
    const Eigen::VectorXd lambda = (A.transpose() * A).ldlt().solve(exact - M.transpose() * g.weights);
    const Eigen::VectorXd scale = Eigen::VectorXd::Ones(n) + M * lambda;
    if (scale.minCoeff() > 0.5) {
      g.weights = g.weights.cwiseProduct(scale);
      return;
    }
  }
}

SphereGrid build_circle(int resolution) {
  SphereGrid g;
  g.ambient_dim = 2;
  g.resolution = resolution;
  const int n = resolution;
  g.nodes.resize(2, n);
  g.weights = Eigen::VectorXd::Constant(n, 2.0 * std::numbers::pi / n);
  g.antipode.resize(n);
  const int half = n / 2;
  for (int k = 0; k < half; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / n;
    g.nodes.col(k) << std::cos(theta), std::sin(theta);
    g.nodes.col(k + half) = -g.nodes.col(k);
    g.antipode[k] = k + half;
    g.antipode[k + half] = k;
  }
  return g;
}

SphereGrid build_icosphere(int freq) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> ico;
  for (double s1 : {-1.0, 1.0})
    for (double s2 : {-1.0, 1.0}) {
      ico.emplace_back(0.0, s1, s2 * phi);
      ico.emplace_back(s1, s2 * phi, 0.0);
      ico.emplace_back(s2 * phi, 0.0, s1);
    }
  std::vector<int> ico_anti(12);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j)
      if (ico[j] == -ico[i]) ico_anti[i] = j;

  std::vector<std::array<int, 3>> faces;
  for (int a = 0; a < 12; ++a)
    for (int b = a + 1; b < 12; ++b)
      for (int c = b + 1; c < 12; ++c) {
        if (std::abs((ico[a] - ico[b]).norm() - 2.0) > 1e-9) continue;
        if (std::abs((ico[b] - ico[c]).norm() - 2.0) > 1e-9) continue;
        if (std::abs((ico[c] - ico[a]).norm() - 2.0) > 1e-9) continue;
        if ((ico[b] - ico[a]).cross(ico[c] - ico[a]).dot(ico[a]) > 0)
          faces.push_back({a, b, c});
        else
          faces.push_back({a, c, b});
      }

  std::map<Key, int> index;
  std::vector<Key> keys;
  auto node_of = [&](const Key &key) {
    auto [it, inserted] = index.try_emplace(key, static_cast<int>(keys.size()));
    if (inserted) keys.push_back(key);
    return it->second;
  };

  std::vector<Eigen::Vector3i> tris;
  for (const auto &f : faces) {
    auto at = [&](int i, int j) {
      return node_of(make_key({{{f[0], freq - i - j}, {f[1], i}, {f[2], j}}}));
    };
    for (int i = 0; i < freq; ++i)
      for (int j = 0; i + j < freq; ++j) {
        tris.emplace_back(at(i, j), at(i + 1, j), at(i, j + 1));
        if (i + j + 2 <= freq) tris.emplace_back(at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
      }
  }

  const int n = static_cast<int>(keys.size());
  SphereGrid g;
  g.ambient_dim = 3;
  g.resolution = freq;
  g.nodes.resize(3, n);
  g.antipode.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    const Key &key = keys[i];
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    for (int k = 0; k < 3 && key[2 * k] >= 0; ++k) p += key[2 * k + 1] * ico[key[2 * k]];
    g.nodes.col(i) = p.normalized();
    Key anti = make_key({{{key[0] >= 0 ? ico_anti[key[0]] : -1, key[0] >= 0 ? key[1] : 0},
                          {key[2] >= 0 ? ico_anti[key[2]] : -1, key[2] >= 0 ? key[3] : 0},
                          {key[4] >= 0 ? ico_anti[key[4]] : -1, key[4] >= 0 ? key[5] : 0}}});
    g.antipode[i] = index.at(anti);
  }
  for (int i = 0; i < n; ++i)
    if (i < g.antipode[i]) g.nodes.col(g.antipode[i]) = -g.nodes.col(i);

  g.weights = Eigen::VectorXd::Zero(n);
  for (const auto &t : tris) {
    const Eigen::Vector3d a = g.nodes.col(t[0]), b = g.nodes.col(t[1]), c = g.nodes.col(t[2]);
    const Eigen::Vector3d centroid = (a + b + c).normalized();
    const Eigen::Vector3d mab = (a + b).normalized(), mbc = (b + c).normalized(),
                          mca = (c + a).normalized();
    g.weights[t[0]] += spherical_triangle_area(a, mab, centroid) + spherical_triangle_area(a, centroid, mca);
    g.weights[t[1]] += spherical_triangle_area(b, mbc, centroid) + spherical_triangle_area(b, centroid, mab);
    g.weights[t[2]] += spherical_triangle_area(c, mca, centroid) + spherical_triangle_area(c, centroid, mbc);
  }
  for (int i = 0; i < n; ++i)
    if (i < g.antipode[i]) {
      const double w = 0.5 * (g.weights[i] + g.weights[g.antipode[i]]);
      g.weights[i] = g.weights[g.antipode[i]] = w;
    }
  g.triangles = std::move(tris);
  correct_moments(g);
  return g;
}

} // namespace

void SphereGrid::finalize_pairs() {
  reps_.clear();
  pair_of_.assign(antipode.size(), -1);
  for (int i = 0; i < static_cast<int>(antipode.size()); ++i)
    if (i < antipode[i]) {
      pair_of_[i] = pair_of_[antipode[i]] = static_cast<int>(reps_.size());
      reps_.push_back(i);
    }
  stencil_cache = make_stencil_cache();
}

double sphere_area(int ambient_dim) {
  if (ambient_dim == 2) return 2.0 * std::numbers::pi;
  if (ambient_dim == 3) return 4.0 * std::numbers::pi;
  throw std::invalid_argument("sphere_area: unsupported dimension " + std::to_string(ambient_dim));
}

SphereGrid build_grid(int ambient_dim, int resolution) {
  if (ambient_dim != 2 && ambient_dim != 3)
    throw std::invalid_argument("build_grid: unsupported dimension " + std::to_string(ambient_dim));
  if (resolution < 4) throw std::invalid_argument("build_grid: resolution must be >= 4");
  if (resolution % 2 != 0) throw std::invalid_argument("build_grid: resolution must be even");
  SphereGrid g = ambient_dim == 2 ? build_circle(resolution) : build_icosphere(resolution);
  g.finalize_pairs();
  return g;
}

Eigen::VectorXd symmetrize(const SphereGrid &grid, const Eigen::Ref<const Eigen::VectorXd> &values) {
  if (values.size() != grid.size()) throw std::invalid_argument("symmetrize: length mismatch");
  Eigen::VectorXd out(values.size());
  for (int i : grid.representatives()) {
    const double v = 0.5 * (values[i] + values[grid.antipode[i]]);
    out[i] = out[grid.antipode[i]] = v;
  }
  return out;
}

double oddness(const SphereGrid &grid, const Eigen::Ref<const Eigen::VectorXd> &values) {
  double worst = 0.0;
  for (int i : grid.representatives())
    worst = std::max(worst, std::abs(values[i] - values[grid.antipode[i]]));
  return worst;
}

Eigen::VectorXd fold(const SphereGrid &grid, const Eigen::Ref<const Eigen::VectorXd> &values) {
  if (values.size() != grid.size()) throw std::invalid_argument("fold: length mismatch");
  const auto &reps = grid.representatives();
  Eigen::VectorXd out(reps.size());
  for (std::size_t j = 0; j < reps.size(); ++j) out[j] = values[reps[j]];
  return out;
}

Eigen::VectorXd unfold(const SphereGrid &grid, const Eigen::Ref<const Eigen::VectorXd> &pair_values) {
  if (pair_values.size() != grid.pair_count()) throw std::invalid_argument("unfold: length mismatch");
  Eigen::VectorXd out(grid.size());
  const auto &reps = grid.representatives();
  for (std::size_t j = 0; j < reps.size(); ++j) out[reps[j]] = out[grid.antipode[reps[j]]] = pair_values[j];
  return out;
}

double node_angle(const SphereGrid &grid, Eigen::Index i) {
  return std::atan2(grid.nodes(1, i), grid.nodes(0, i));
}

} // namespace lpbm
