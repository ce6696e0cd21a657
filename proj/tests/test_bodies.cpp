#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lpbm/bodies.hpp"
#include "lpbm/hull.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace lpbm;

namespace {

PolytopeBody random_body(int n, int pairs, std::mt19937_64 &rng) {
  while (true) {
    Eigen::MatrixXd U;
    Eigen::VectorXd c;
    oracle::random_symmetric_halfspaces(n, pairs, rng, U, c);
    try {
      return polytope_from_halfspaces(U, c);
    } catch (const std::domain_error &) {
    }
  }
}

// Vertex polygon in angular order, for the shoelace oracle.
oracle::Polygon vertex_polygon(const PolytopeBody &b) {
  oracle::Polygon poly;
  for (Eigen::Index v = 0; v < b.vertices.cols(); ++v) poly.emplace_back(b.vertices.col(v));
  std::sort(poly.begin(), poly.end(),
            [](const auto &p, const auto &q) { return std::atan2(p.y(), p.x()) < std::atan2(q.y(), q.x()); });
  return poly;
}

// Sum of origin tetrahedra over a triangulated primal hull.
double tetra_volume(const PolytopeBody &b) {
  const Hull3 h = convex_hull_3d(b.vertices);
  double v = 0.0;
  for (const auto &t : h.faces)
    v += b.vertices.col(t[0]).dot(Eigen::Vector3d(b.vertices.col(t[1])).cross(Eigen::Vector3d(b.vertices.col(t[2])))) / 6.0;
  return v;
}

SupportField ellipse_field(const GridPtr &g, const Eigen::VectorXd &a) {
  return make_support_field(g, sample(*g, [&](const Eigen::VectorXd &x) { return a.cwiseProduct(x).norm(); }));
}

} // namespace

TEST_CASE("volumes of standard bodies") {
  CHECK(volume(cube(3)) == doctest::Approx(8.0).epsilon(1e-15));
  CHECK(volume(cube(2)) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(volume(cross_polytope(2)) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(volume(cross_polytope(3)) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("polygon volume matches the shoelace oracle") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const PolytopeBody b = random_body(2, 3 + trial % 8, rng);
    CHECK(std::abs(volume(b) - oracle::shoelace(vertex_polygon(b))) < 1e-10);
    const oracle::Polygon clipped = oracle::intersect(b.normals, b.offsets);
    CHECK(std::abs(volume(b) - oracle::shoelace(clipped)) < 1e-10);
  }
}

TEST_CASE("polytope volume matches primal tetrahedra (n=3)") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const PolytopeBody b = random_body(3, 4 + trial % 10, rng);
    CHECK(std::abs(volume(b) - tetra_volume(b)) < 1e-10 * volume(b));
    for (Eigen::Index v = 0; v < b.vertices.cols(); ++v)
      CHECK(((b.normals.transpose() * b.vertices.col(v) - b.offsets).array() <= 1e-9).all());
  }
}

TEST_CASE("support_of_polytope: corners and LP oracle") {
  const GridPtr g3 = make_grid(3, 8);
  const SupportField hc = support_of_polytope(cube(3), g3);
  for (Eigen::Index i = 0; i < g3->size(); ++i)
    if ((g3->node(i) - Eigen::Vector3d::UnitX()).norm() < 1e-14) CHECK(hc.values[i] == doctest::Approx(1.0));
  const PolytopeBody sq = cube(2);
  CHECK(support_values(sq, Eigen::Vector2d(1, 1).normalized())[0] == doctest::Approx(std::sqrt(2.0)));

  std::mt19937_64 rng(13);
  for (int n : {2, 3}) {
    const GridPtr g = make_grid(n, n == 2 ? 32 : 4);
    for (int trial = 0; trial < 5; ++trial) {
      const PolytopeBody b = random_body(n, 5, rng);
      const SupportField h = support_of_polytope(b, g);
      for (Eigen::Index i = 0; i < g->size(); ++i)
        CHECK(std::abs(h.values[i] - oracle::lp_max(b.normals, b.offsets, g->node(i))) < 1e-9);
    }
  }
  CHECK_THROWS_AS(support_of_polytope(cube(2), g3), std::invalid_argument);
}

TEST_CASE("halfspace input validation") {
  Eigen::MatrixXd U(2, 3);
  U << 1, -1, 0, 0, 0, 1;
  CHECK_THROWS_AS(polytope_from_halfspaces(U, Eigen::Vector3d(1, 1, 1)), std::invalid_argument);
  Eigen::MatrixXd V(2, 2);
  V << 1, -1, 0, 0;
  CHECK_THROWS_AS(polytope_from_halfspaces(V, Eigen::Vector2d(1, 1)), std::domain_error);
  CHECK_THROWS_AS(polytope_from_halfspaces(V, Eigen::Vector2d(1, -1)), std::invalid_argument);
}

TEST_CASE("Wulff shapes") {
  SUBCASE("constant q approaches the unit ball from inside") {
    double prev = INFINITY;
    for (int res : {16, 64, 256}) {
      const GridPtr g = make_grid(2, res);
      const PolytopeBody b = wulff_shape(Eigen::VectorXd::Ones(g->size()), *g);
      const Eigen::VectorXd h = support_values(b, g->nodes);
      CHECK(h.maxCoeff() <= 1.0 + 1e-12);
      const double gap = (1.0 - h.array()).maxCoeff();
      CHECK(gap <= prev);
      prev = gap;
      // Circumscribed regular polygon: exact area N tan(pi/N).
      CHECK(std::abs(volume(b) - res * std::tan(std::numbers::pi / res)) < 1e-12);
    }
  }
  SUBCASE("cube samples on a dense grid recover the square") {
    const GridPtr g = make_grid(2, 512);
    const PolytopeBody b = wulff_shape(support_values(cube(2), g->nodes), *g);
    CHECK(std::abs(volume(b) - 4.0) < 1e-6);
  }
  SUBCASE("a lowered value becomes an active facet") {
    const GridPtr g = make_grid(2, 64);
    Eigen::VectorXd q = Eigen::VectorXd::Ones(g->size());
    q[5] = q[5 + 32] = 0.9;
    const PolytopeBody b = wulff_shape(q, *g);
    const Eigen::VectorXd h = support_values(b, g->nodes);
    CHECK(std::abs(h[5] - 0.9) < 1e-12);
    CHECK(b.facet_areas[5] > 0.0);
    const oracle::Polygon poly = oracle::intersect(g->nodes, q);
    CHECK(std::abs(volume(b) - oracle::shoelace(poly)) < 1e-12);
  }
  SUBCASE("contraction, idempotence, monotonicity on random q") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.7, 1.3);
    for (int n : {2, 3}) {
      const GridPtr g = make_grid(n, n == 2 ? 48 : 6);
      Eigen::VectorXd q(g->size());
      for (auto &v : q) v = u(rng);
      q = symmetrize(*g, q);
      const PolytopeBody b = wulff_shape(q, *g);
      const Eigen::VectorXd h = support_values(b, g->nodes);
      CHECK(((h - q).array() <= 1e-9).all());
      const PolytopeBody again = wulff_shape(h, *g);
      CHECK(std::abs(volume(again) - volume(b)) < 1e-10);
      const PolytopeBody bigger = wulff_shape((q.array() + 0.01).matrix(), *g);
      CHECK(volume(bigger) >= volume(b));
      if (n == 2) CHECK(std::abs(volume(b) - oracle::shoelace(oracle::intersect(g->nodes, q))) < 1e-10);
      else CHECK(std::abs(volume(b) - tetra_volume(b)) < 1e-10);
    }
  }
  CHECK_THROWS_AS(wulff_shape(Eigen::MatrixXd(Eigen::Matrix2d::Identity()), Eigen::VectorXd(Eigen::Vector2d(1, -1))), std::invalid_argument);
}

TEST_CASE("grid L_p combinations") {
  const GridPtr g = make_grid(2, 64);
  const SupportField hK = support_of_polytope(cube(2), g);
  Eigen::Matrix2d R;
  R << std::cos(std::numbers::pi / 4), -std::sin(std::numbers::pi / 4), std::sin(std::numbers::pi / 4),
      std::cos(std::numbers::pi / 4);
  Eigen::MatrixXd U(2, 4);
  U << R * Eigen::Vector2d::UnitX(), R * Eigen::Vector2d::UnitY(), -R * Eigen::Vector2d::UnitX(),
      -R * Eigen::Vector2d::UnitY();
  const SupportField hL = support_of_polytope(polytope_from_halfspaces(U, Eigen::Vector4d::Ones()), g);

  CHECK(std::abs(volume(lp_combination(hK, hL, 0.0, 0.5)) - volume(wulff_shape(hK.values, *g))) < 1e-14);
  CHECK(std::abs(volume(log_combination(hK, hL, 1.0)) - volume(wulff_shape(hL.values, *g))) < 1e-14);
  for (double p : {0.3, 1.0})
    CHECK(std::abs(volume(lp_combination(hK, hK, 0.4, p)) - volume(wulff_shape(hK.values, *g))) < 1e-12);

  // Exact 2-D oracle: clip by every grid halfspace.
  const PolytopeBody mix = lp_combination(hK, hL, 0.5, 0.5);
  Eigen::VectorXd q(g->size());
  for (Eigen::Index i = 0; i < q.size(); ++i) q[i] = std::pow(0.5 * std::sqrt(hK.values[i]) + 0.5 * std::sqrt(hL.values[i]), 2);
  CHECK(std::abs(volume(mix) - oracle::shoelace(oracle::intersect(g->nodes, q))) < 1e-8);

  // AM-GM: the log combination is smaller than the Minkowski combination.
  CHECK(volume(log_combination(hK, hL, 0.5)) <= volume(lp_combination(hK, hL, 0.5, 1.0)) + 1e-14);
  // Power-mean monotonicity in p.
  double prev = 0.0;
  for (double p : {0.1, 0.3, 0.6, 1.0}) {
    const double v = volume(lp_combination(hK, hL, 0.5, p));
    CHECK(v >= prev - 1e-14);
    prev = v;
  }
  CHECK_THROWS_AS(lp_combination(hK, hL, 0.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(lp_combination(hK, hL, 1.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(lp_combination(hK, support_of_polytope(cube(2), make_grid(2, 64)), 0.5, 0.5), std::invalid_argument);
}

TEST_CASE("exact polytope combinations bound the grid ones and converge") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const PolytopeBody K = random_body(2, 4, rng), L = random_body(2, 5, rng);
    for (double p : {0.0, 0.5, 1.0}) {
      const PolytopeBody exact = p == 0.0 ? log_combination(K, L, 0.3) : lp_combination(K, L, 0.3, p);
      double prev = INFINITY;
      for (int res : {256, 2048}) {
        const GridPtr g = make_grid(2, res);
        const SupportField hK = support_of_polytope(K, g), hL = support_of_polytope(L, g);
        const double approx = volume(p == 0.0 ? log_combination(hK, hL, 0.3) : lp_combination(hK, hL, 0.3, p));
        CHECK(approx >= volume(exact) - 1e-12);
        CHECK(approx - volume(exact) <= prev);
        prev = approx - volume(exact);
      }
      // Missing facet directions cost O(grid spacing).
      CHECK(prev < 1e-2);
      // Exact oracle for p = 1: the Minkowski combination's volume is a
      // quadratic in lambda computed from the summed vertex hull.
      if (p == 1.0) {
        Eigen::MatrixXd sums(2, K.vertices.cols() * L.vertices.cols());
        for (Eigen::Index i = 0; i < K.vertices.cols(); ++i)
          for (Eigen::Index j = 0; j < L.vertices.cols(); ++j)
            sums.col(i * L.vertices.cols() + j) = 0.7 * K.vertices.col(i) + 0.3 * L.vertices.col(j);
        const auto idx = convex_hull_2d(sums);
        oracle::Polygon poly;
        for (int k : idx) poly.emplace_back(sums.col(k));
        CHECK(std::abs(volume(exact) - oracle::shoelace(poly)) < 1e-10);
      }
    }
  }
}

TEST_CASE("exact polytope combination in 3-d matches the Minkowski sum") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 5; ++trial) {
    const PolytopeBody K = random_body(3, 5, rng), L = random_body(3, 6, rng);
    const PolytopeBody mix = lp_combination(K, L, 0.5, 1.0);
    Eigen::MatrixXd sums(3, K.vertices.cols() * L.vertices.cols());
    for (Eigen::Index i = 0; i < K.vertices.cols(); ++i)
      for (Eigen::Index j = 0; j < L.vertices.cols(); ++j)
        sums.col(i * L.vertices.cols() + j) = 0.5 * (K.vertices.col(i) + L.vertices.col(j));
    const Hull3 h = convex_hull_3d(sums);
    double v = 0.0;
    for (const auto &t : h.faces)
      v += sums.col(t[0]).dot(Eigen::Vector3d(sums.col(t[1])).cross(Eigen::Vector3d(sums.col(t[2])))) / 6.0;
    CHECK(std::abs(volume(mix) - v) < 1e-10 * v);
    CHECK(volume(lp_combination(K, L, 0.5, 0.5)) <= volume(mix) + 1e-12);
  }
}

TEST_CASE("polytope measures") {
  const PolytopeBody sq = cube(2);
  const FacetMeasure S = surface_area_measure_poly(sq);
  CHECK(S.masses.size() == 4);
  for (Eigen::Index k = 0; k < 4; ++k) CHECK(S.masses[k] == doctest::Approx(2.0));
  const FacetMeasure V = cone_volume_measure_poly(sq);
  for (Eigen::Index k = 0; k < 4; ++k) CHECK(V.masses[k] == doctest::Approx(1.0));
  CHECK(V.total() == doctest::Approx(4.0));
  CHECK(std::abs(normalized_cone_measure_poly(scaled(sq, 2.0)).total() - 1.0) < 1e-15);

  std::mt19937_64 rng(31);
  for (int n : {2, 3})
    for (int trial = 0; trial < 20; ++trial) {
      const PolytopeBody b = random_body(n, 6, rng);
      const double oracle_volume = n == 2 ? oracle::shoelace(vertex_polygon(b)) : tetra_volume(b);
      CHECK(std::abs(cone_volume_measure_poly(b).total() - oracle_volume) < 1e-12 * std::max(1.0, oracle_volume) * 10);
      const double c = 1.7;
      const PolytopeBody bc = scaled(b, c);
      CHECK(std::abs(volume(bc) - std::pow(c, n) * volume(b)) < 1e-12 * volume(bc));
      const PolytopeBody rebuilt = polytope_from_halfspaces(b.normals, c * b.offsets);
      CHECK(std::abs(volume(rebuilt) - std::pow(c, n) * volume(b)) < 1e-12 * volume(bc));
      CHECK(std::abs(surface_area_measure_poly(rebuilt).total() - std::pow(c, n - 1) * surface_area_measure_poly(b).total()) <
            1e-12 * surface_area_measure_poly(rebuilt).total());
    }
}

TEST_CASE("smooth measures") {
  SUBCASE("unit ball") {
    const GridPtr g3 = make_grid(3, 8);
    const DiscreteMeasure S = surface_area_measure(make_support_field(g3, Eigen::VectorXd::Ones(g3->size())));
    CHECK((S.masses - g3->weights).cwiseAbs().maxCoeff() < 1e-12);
    const GridPtr g2 = make_grid(2, 32);
    CHECK(std::abs(cone_volume_measure(make_support_field(g2, Eigen::VectorXd::Ones(32))).total() - std::numbers::pi) < 1e-10);
    CHECK(std::abs(cone_volume_measure(make_support_field(g2, Eigen::VectorXd::Constant(32, 2.0))).total() -
                   4.0 * std::numbers::pi) < 1e-10);
    CHECK(std::abs(normalized_cone_measure(make_support_field(g3, Eigen::VectorXd::Ones(g3->size()))).total() - 1.0) < 1e-10);
  }
  SUBCASE("ellipse density and conservation (n=2)") {
    const GridPtr g = make_grid(2, 256);
    const SupportField h = ellipse_field(g, Eigen::Vector2d(1.0, 2.0));
    const DiscreteMeasure S = surface_area_measure(h);
    for (Eigen::Index i = 0; i < g->size(); ++i)
      CHECK(std::abs(S.masses[i] / g->weights[i] - 4.0 / std::pow(h.values[i], 3)) < 1e-6);
    CHECK(std::abs(cone_volume_measure(h).total() - 2.0 * std::numbers::pi) < 1e-9);
    CHECK(oddness(*g, S.masses) == 0.0);
  }
  SUBCASE("ellipsoid conservation (n=3), refining") {
    const Eigen::Vector3d a(1.0, 1.1, 0.9);
    const double exact = 4.0 / 3.0 * std::numbers::pi * a.prod();
    double prev = INFINITY;
    for (int res : {16, 24, 28}) {
      const GridPtr g = make_grid(3, res);
      const DiscreteMeasure V = cone_volume_measure(ellipse_field(g, a));
      const double err = std::abs(V.total() - exact);
      MESSAGE("frequency " << res << " conservation error " << err);
      CHECK(err < prev);
      prev = err;
      CHECK(oddness(*g, V.masses) == 0.0);
    }
    CHECK(prev < 1e-6);
  }
  SUBCASE("scaling laws") {
    for (int n : {2, 3}) {
      const GridPtr g = make_grid(n, n == 2 ? 64 : 8);
      const SupportField h = ellipse_field(g, Eigen::Vector3d(1.0, 1.2, 0.9).head(n));
      const SupportField h2 = make_support_field(g, 3.0 * h.values);
      const double sS = surface_area_measure(h2).total() / surface_area_measure(h).total();
      const double sV = cone_volume_measure(h2).total() / cone_volume_measure(h).total();
      CHECK(std::abs(sS - std::pow(3.0, n - 1)) < 1e-10);
      CHECK(std::abs(sV - std::pow(3.0, n)) < 1e-10);
      CHECK(std::abs(normalized_cone_measure(h2).total() - 1.0) < 1e-12);
      CHECK((normalized_cone_measure(h2).masses - normalized_cone_measure(h).masses).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
  SUBCASE("convexity violation is flagged") {
    const GridPtr g = make_grid(2, 64);
    const Eigen::VectorXd h = sample(*g, [](const Eigen::VectorXd &x) { return 1.0 + 0.2 * std::cos(8 * std::atan2(x[1], x[0])); });
    CHECK_THROWS_AS(surface_area_measure(make_support_field(g, h)), ConvexityViolation);
  }
}

TEST_CASE("support field validation") {
  const GridPtr g = make_grid(2, 8);
  CHECK_THROWS_AS(make_support_field(g, Eigen::VectorXd::Zero(8)), std::invalid_argument);
  CHECK_THROWS_AS(make_support_field(g, Eigen::VectorXd::Ones(7)), std::invalid_argument);
  Eigen::VectorXd odd = Eigen::VectorXd::Ones(8);
  odd[0] = 1.1;
  CHECK_THROWS_AS(make_support_field(g, odd), std::invalid_argument);
}

TEST_CASE("John ellipsoid") {
  SUBCASE("cube: inscribed unit ball with KKT multipliers") {
    for (int n : {2, 3}) {
      const JohnResult r = john_ellipsoid(cube(n));
      CHECK((r.ellipsoid.radii.array() - 1.0).abs().maxCoeff() < 1e-6);
      CHECK(r.containment <= 1.0);
      CHECK(std::abs(r.sandwich_ratio - std::sqrt(double(n))) < 1e-6);
      CHECK(r.within_n_three_halves);
    }
  }
  SUBCASE("fine polygon approximating the disk") {
    const GridPtr g = make_grid(2, 512);
    const JohnResult r = john_ellipsoid(wulff_shape(Eigen::VectorXd::Ones(g->size()), *g));
    CHECK((r.ellipsoid.radii.array() - 1.0).abs().maxCoeff() < 1e-6);
  }
  SUBCASE("affine image of a cube") {
    Eigen::MatrixXd U(2, 4);
    U << 1, 0, -1, 0, 0, 1, 0, -1;
    Eigen::VectorXd c(4);
    c << 2, 0.5, 2, 0.5;
    const JohnResult r = john_ellipsoid(polytope_from_halfspaces(U, c));
    CHECK(std::abs(r.ellipsoid.radii[0] - 2.0) < 1e-6);
    CHECK(std::abs(r.ellipsoid.radii[1] - 0.5) < 1e-6);
    CHECK(std::abs(std::abs(r.ellipsoid.axes(0, 0)) - 1.0) < 1e-6);
  }
  SUBCASE("random polytopes: KKT and support sandwich") {
    std::mt19937_64 rng(37);
    for (int n : {2, 3}) {
      const GridPtr g = make_grid(n, n == 2 ? 128 : 8);
      for (int trial = 0; trial < 10; ++trial) {
        const PolytopeBody b = random_body(n, 3 + trial, rng);
        const JohnResult r = john_ellipsoid(b);
        const Ellipsoid &E = r.ellipsoid;
        CHECK((E.axes.transpose() * E.axes - Eigen::MatrixXd::Identity(n, n)).norm() < 1e-10);
        CHECK(E.radii[0] >= E.radii[n - 1]);
        // KKT: Q^{-1} = sum lambda_k u u^T over tight facets, lambda >= 0.
        const Eigen::MatrixXd Q = E.shape();
        const FacetMeasure F = surface_area_measure_poly(b);
        const Eigen::VectorXd hK = support_values(b, g->nodes);
        for (Eigen::Index i = 0; i < g->size(); ++i) {
          const double hE = E.support(g->node(i));
          CHECK(hE <= hK[i] + 1e-9);
          CHECK(hK[i] <= std::pow(n, 1.5) * hE + 1e-9);
        }
        Eigen::MatrixXd tight(n, 0);
        for (Eigen::Index k = 0; k < F.directions.cols(); ++k) {
          const Eigen::VectorXd u = F.directions.col(k);
          if (std::abs(std::sqrt(u.dot(Q * u)) - F.offsets[k]) < 1e-6 * F.offsets[k]) {
            tight.conservativeResize(n, tight.cols() + 1);
            tight.col(tight.cols() - 1) = u / F.offsets[k];
          }
        }
        // Solve for nonnegative weights by least squares on vech.
        const Eigen::MatrixXd target = Q.inverse();
        Eigen::MatrixXd A(n * n, tight.cols());
        for (Eigen::Index k = 0; k < tight.cols(); ++k) {
          const Eigen::MatrixXd uu = tight.col(k) * tight.col(k).transpose();
          A.col(k) = Eigen::Map<const Eigen::VectorXd>(uu.data(), n * n);
        }
        const Eigen::VectorXd lam = A.completeOrthogonalDecomposition().solve(Eigen::Map<const Eigen::VectorXd>(target.data(), n * n));
        CHECK((A * lam - Eigen::Map<const Eigen::VectorXd>(target.data(), n * n)).norm() < 1e-5 * target.norm());
        CHECK(r.within_sqrt_n);
      }
    }
  }
}

TEST_CASE("Hausdorff distance and a priori report") {
  const GridPtr g = make_grid(2, 16);
  const SupportField h = ellipse_field(g, Eigen::Vector2d(1.0, 1.5));
  CHECK(hausdorff_distance_even(h, h) == 0.0);
  const SupportField hc = make_support_field(g, (h.values.array() + 0.25).matrix());
  CHECK(hausdorff_distance_even(h, hc) == doctest::Approx(0.25));
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd a(16), b(16), c(16);
    for (int i = 0; i < 16; ++i) a[i] = u(rng), b[i] = u(rng), c[i] = u(rng);
    const SupportField A = make_support_field(g, symmetrize(*g, a)), B = make_support_field(g, symmetrize(*g, b)),
                       C = make_support_field(g, symmetrize(*g, c));
    CHECK(hausdorff_distance_even(A, C) <= hausdorff_distance_even(A, B) + hausdorff_distance_even(B, C) + 1e-15);
  }
  const AprioriReport r = a_priori_bound_check(make_support_field(g, Eigen::VectorXd::Ones(16)), Eigen::VectorXd::Ones(16), 0.8, 2.0);
  CHECK(r.min_h == 1.0);
  CHECK(r.observed_constant == 1.0);
  CHECK_THROWS_AS(a_priori_bound_check(h, Eigen::VectorXd::Constant(16, 3.0), 0.8, 2.0), std::invalid_argument);
}
