#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lpbm/io.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;
using lpbm::io::json;

namespace {

const fs::path root = fs::temp_directory_path() / "lpbm_test_cli";

// Writes `ini` to <root>/<name>.ini and runs `lpbm <command>` into <root>/<name>/.
int run_cli(const std::string &command, const std::string &name, const std::string &ini, const std::string &extra = "") {
  fs::create_directories(root);
  const fs::path cfg = root / (name + ".ini");
  std::ofstream(cfg) << ini;
  const std::string cmd = std::string(LPBM_CLI) + " " + command + " " + cfg.string() + " -o " + (root / name).string() + " " +
                          extra + " 2>" + (root / (name + ".err")).string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json read_json(const fs::path &p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json without_timing(json j) {
  j.erase("timing");
  return j;
}

} // namespace

TEST_CASE("solve: ball, manufactured ellipse and failure") {
  CHECK(run_cli("solve", "ball", "[grid]\nn = 2\nresolution = 128\n[problem]\np = 0.8\ndensity = constant:1\n") == 0);
  const json body = read_json(root / "ball" / "solution.json");
  CHECK(body["kind"] == "support");
  for (double v : body["values"]) CHECK(std::abs(v - 1.0) <= 1e-8);
  CHECK(fs::exists(root / "ball" / "trace.csv"));
  CHECK(fs::exists(root / "ball" / "cone_volume.csv"));

  CHECK(run_cli("solve", "ellipse",
                "[grid]\nn = 2\nresolution = 256\n[problem]\np = 0.6\ndensity = manufactured:ellipsoid:1.4,0.8\n") == 0);
  const json r = read_json(root / "ellipse" / "report.json");
  CHECK(r["converged"] == true);
  CHECK(r["residual_sup"].get<double>() <= r["tolerance"].get<double>());
  CHECK(r["manufactured"]["hausdorff_error"].get<double>() <= 1e-8);

  CHECK(run_cli("solve", "fail",
                "[grid]\nn = 2\nresolution = 128\n[problem]\np = 0.5\ndensity = harmonic:1,0.6\n[solver]\nmax_iterations = 1\n") == 2);
  CHECK(read_json(root / "fail" / "report.json")["converged"] == false);
  CHECK_FALSE(fs::exists(root / "fail" / "solution.json"));
}

TEST_CASE("config errors exit with 1") {
  CHECK(run_cli("solve", "bad_number", "[grid]\nn = two\n") == 1);
  CHECK(run_cli("solve", "bad_key", "[grid]\nn = 2\nresolutoin = 64\n") == 1);
  CHECK(run_cli("solve", "bad_section", "[gird]\nn = 2\n") == 1);
  CHECK(run_cli("solve", "bad_density", "[problem]\ndensity = constant:-1\n") == 1);
  CHECK(run_cli("solve", "bad_file", "[problem]\ndensity = file:/nonexistent/f.txt\n") == 1);
  CHECK(run_cli("solve", "bad_syntax", "[grid\nn = 2\n") == 1);
  CHECK(run_cli("verify", "bad_kind", "[verify]\nkind = cubic\n") == 1);
  CHECK(slurp(root / "bad_key.err").find("resolutoin") != std::string::npos);
  CHECK_FALSE(fs::exists(root / "bad_key" / "report.json"));
  const std::string missing = std::string(LPBM_CLI) + " solve /nonexistent.ini 2>/dev/null";
  CHECK(WEXITSTATUS(std::system(missing.c_str())) == 1);
}

TEST_CASE("density from a file") {
  fs::create_directories(root);
  std::ofstream f(root / "density.txt");
  for (int i = 0; i < 64; ++i) f << 2.0 << (i % 8 == 7 ? "\n" : ", ");
  f.close();
  CHECK(run_cli("solve", "filed",
                "[grid]\nresolution = 64\n[problem]\np = 0.5\ndensity = file:" + (root / "density.txt").string() + "\n") == 0);
  for (double v : read_json(root / "filed" / "solution.json")["values"]) CHECK(v == doctest::Approx(std::pow(2.0, 1 / 1.5)).epsilon(1e-9));
}

TEST_CASE("verify: identical pairs, clean batch, fault injection") {
  CHECK(run_cli("verify", "same", "[verify]\npairs = 10\nidentical = true\n[run]\nseed = 3\n") == 0);
  std::istringstream csv(slurp(root / "same" / "batch.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "pair,kind,p,lambda,lhs,rhs,slack,verdict");
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    const auto c6 = [&] {
      std::size_t pos = 0;
      for (int k = 0; k < 6; ++k) pos = line.find(',', pos) + 1;
      return std::stod(line.substr(pos));
    }();
    CHECK(std::abs(c6) <= 1e-10);
  }
  CHECK(rows == 10 * 3 * 4);

  CHECK(run_cli("verify", "planar", "[verify]\npairs = 50\n[problem]\np_list = 0.6\n[run]\nseed = 1\nworkers = 2\n") == 0);
  CHECK(read_json(root / "planar" / "summary.json")["violations"] == 0);
  CHECK(run_cli("verify", "fault", "[verify]\npairs = 5\ntest_volume_fault = 0.5\n") == 3);
  CHECK(read_json(root / "fault" / "summary.json")["violations"].get<int>() > 0);
}

TEST_CASE("spectrum, continuation, probe, logsolve") {
  CHECK(run_cli("spectrum", "spec", "[grid]\nresolution = 64\n[problem]\np = 0.5\n[spectrum]\nk_max = 4\n") == 0);
  const json s = read_json(root / "spec" / "spectrum.json");
  CHECK(s["max_relative_error"].get<double>() <= 1e-10);
  CHECK(s["eigenvalues"].size() == 5);
  CHECK(fs::exists(root / "spec" / "eigenvalues.csv"));

  CHECK(run_cli("continuation", "cont", "[grid]\nresolution = 64\n[problem]\np = 0.9\n[continuation]\nsteps = 5\ndump_solutions = true\n") == 0);
  const json t = read_json(root / "cont" / "trace.json");
  CHECK(t["completed"] == true);
  for (double d : t["step_distance"]) CHECK(d <= 1e-12);
  CHECK(fs::exists(root / "cont" / "solutions" / "solution_005.json"));

  CHECK(run_cli("probe", "probe", "[grid]\nresolution = 64\n[problem]\np = 0.8\n[probe]\nstarts = 2\n[run]\nseed = 9\n") == 0);
  const json c = read_json(root / "probe" / "cluster.json");
  CHECK(c["cluster_count"] == 1);
  CHECK(c["seed"] == 9);

  CHECK(run_cli("logsolve", "logball", "[grid]\nresolution = 64\n[problem]\ndensity = constant:0.5\n[logsolve]\nstarts = 3\n") == 0);
  for (double v : read_json(root / "logball" / "solution.json")["values"]) CHECK(std::abs(v - 1.0) <= 1e-9);
  CHECK(read_json(root / "logball" / "report.json")["max_distance_to_first"].get<double>() <= 1e-8);
}

TEST_CASE("reports are reproducible apart from timing") {
  const std::string ini = "[grid]\nresolution = 64\n[problem]\np = 0.9\ndensity = harmonic:1,0.2\n[probe]\nstarts = 4\n";
  REQUIRE(run_cli("probe", "det_a", ini, "--seed 77") == 0);
  REQUIRE(run_cli("probe", "det_b", ini, "--seed 77") == 0);
  const json a = read_json(root / "det_a" / "cluster.json"), b = read_json(root / "det_b" / "cluster.json");
  CHECK(a["seed"] == 77);
  CHECK(a.contains("timing"));
  CHECK(without_timing(a).dump() == without_timing(b).dump());
  CHECK(slurp(root / "det_a" / "cluster.csv") == slurp(root / "det_b" / "cluster.csv"));
  for (const auto &e : fs::recursive_directory_iterator(root)) CHECK(e.path().extension() != ".tmp");
  fs::remove_all(root);
}
