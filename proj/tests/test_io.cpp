#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lpbm/io.hpp"

#include <fstream>
#include <sstream>

using namespace lpbm;

namespace {

std::string slurp(const std::filesystem::path &p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int line_count(const std::string &s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

std::filesystem::path scratch(const std::string &name) {
  const auto dir = std::filesystem::temp_directory_path() / "lpbm_test_io";
  std::filesystem::create_directories(dir);
  return dir / name;
}

} // namespace

TEST_CASE("support bodies round-trip exactly") {
  for (auto [n, N] : {std::pair{2, 64}, std::pair{3, 6}}) {
    const GridPtr g = make_grid(n, N);
    const SupportField h =
        make_support_field(g, sample(*g, [](const Eigen::VectorXd &x) { return std::sqrt(1.0 + 0.5 * x[0] * x[0]); }));
    const io::json j = io::body_json(h);
    CHECK(j["kind"] == "support");
    const SupportField back = io::support_from_json(io::json::parse(io::dump(j)));
    CHECK(back.grid->size() == g->size());
    CHECK(back.values == h.values);
  }
  io::json bad = io::body_json(make_support_field(make_grid(2, 16), Eigen::VectorXd::Ones(16)));
  bad["values"].erase(0);
  CHECK_THROWS_AS(io::support_from_json(bad), std::invalid_argument);
}

TEST_CASE("polytope bodies round-trip") {
  const PolytopeBody K = cross_polytope(3, 1.5);
  const PolytopeBody back = io::polytope_from_json(io::json::parse(io::dump(io::body_json(K))));
  CHECK(back.normals == K.normals);
  CHECK(back.offsets == K.offsets);
  CHECK(volume(back) == doctest::Approx(volume(K)).epsilon(1e-14));
  CHECK_THROWS_AS(io::polytope_from_json(io::json{{"kind", "support"}}), std::invalid_argument);
}

TEST_CASE("grid record") {
  const GridPtr g = make_grid(3, 4);
  const io::json j = io::grid_json(*g);
  CHECK(j["nodes"].size() == static_cast<std::size_t>(g->size()));
  CHECK(j["weights"].size() == static_cast<std::size_t>(g->size()));
  CHECK(j["antipode"][0] == g->antipode[0]);
}

TEST_CASE("solve report JSON is deterministic apart from timing") {
  const GridPtr g = make_grid(2, 64);
  const Eigen::VectorXd f = sample(*g, [](const Eigen::VectorXd &x) { return 1.0 + 0.2 * (x[0] * x[0] - x[1] * x[1]); });
  io::json a = io::report_json(solve_lp_minkowski(g, f, 0.8));
  io::json b = io::report_json(solve_lp_minkowski(g, f, 0.8));
  CHECK(a.contains("timing"));
  a.erase("timing");
  b.erase("timing");
  CHECK(io::dump(a) == io::dump(b));
  CHECK(a["converged"] == true);
  CHECK(a["trace"].size() == a["iterations"].get<std::size_t>() + 1);
}

TEST_CASE("CSV tables") {
  const GridPtr g = make_grid(2, 32);
  const SolveReport r = solve_lp_minkowski(g, Eigen::VectorXd::Constant(32, 2.0), 0.5);
  const std::string t = io::trace_csv(r);
  CHECK(t.rfind("iter,residual_sup,damping,margin,sigma_min\n", 0) == 0);
  CHECK(line_count(t) == static_cast<int>(r.trace.size()) + 1);

  const std::string m = io::measure_csv(cone_volume_measure(r.solution));
  CHECK(m.rfind("node,x0,x1,mass\n", 0) == 0);
  CHECK(line_count(m) == 33);

  BatchSummary s;
  s.rows.push_back({0, "lp_bm", 0.5, 0.25, 1.1, 1.0, 0.1, true});
  s.rows.push_back({1, "lp_bm", 0.5, 0.25, 0.9, 1.0, -0.1, false});
  const std::string b = io::batch_csv(s);
  CHECK(b == "pair,kind,p,lambda,lhs,rhs,slack,verdict\n0,lp_bm,0.5,0.25,1.1000000000000001,1,0.10000000000000001,holds\n"
             "1,lp_bm,0.5,0.25,0.90000000000000002,1,-0.10000000000000001,violated\n");
}

TEST_CASE("cluster and continuation reports") {
  const GridPtr g = make_grid(2, 32);
  const ClusterReport c = multiplicity_probe(g, Eigen::VectorXd::Ones(32), 0.8, 3, 5);
  const io::json j = io::report_json(c);
  CHECK(j["cluster_count"] == 1);
  CHECK(j["seed"] == 5);
  CHECK(line_count(io::cluster_csv(c)) == 4);
  const ContinuationTrace tr = continuation_run(g, Eigen::VectorXd::Ones(32), 0.9, 4);
  CHECK(line_count(io::continuation_csv(tr)) == 6);
  CHECK(io::report_json(tr)["completed"] == true);
}

TEST_CASE("atomic writes") {
  const auto path = scratch("report.json");
  io::write_atomic(path, "first\n");
  io::write_atomic(path, "second\n");
  CHECK(slurp(path) == "second\n");
  auto tmp = path;
  tmp += ".tmp";
  CHECK_FALSE(std::filesystem::exists(tmp));
  // The target is a directory: the rename fails and the old content survives.
  const auto dir = scratch("occupied");
  std::filesystem::create_directories(dir / "inner");
  CHECK_THROWS(io::write_atomic(dir, "x"));
  CHECK(std::filesystem::is_directory(dir / "inner"));
  auto dir_tmp = dir;
  dir_tmp += ".tmp";
  CHECK_FALSE(std::filesystem::exists(dir_tmp));
  std::filesystem::remove_all(path.parent_path());
}
