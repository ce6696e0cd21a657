#include "cli.hpp"

#include <boost/property_tree/ini_parser.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace lpbm::cli {

namespace pt = boost::property_tree;
using io::json;

namespace {

const std::map<std::string, std::set<std::string>> kSchema = {
    {"grid", {"n", "resolution"}},
    {"problem", {"p", "p_list", "density"}},
    {"solver", {"tolerance", "max_iterations", "max_halvings"}},
    {"run", {"seed", "workers", "output"}},
    {"solve", {}},
    {"verify", {"kind", "dim", "pairs", "lambdas", "identical", "tolerance", "recheck_band", "near_ball", "test_volume_fault"}},
    {"spectrum", {"body", "k_max"}},
    {"continuation", {"mode", "steps", "max_bisections", "dump_solutions"}},
    {"probe", {"starts", "delta_cluster", "amplitude", "dump_solutions"}},
    {"logsolve", {"starts", "amplitude"}},
};

template <class T> T convert(const std::string &where, const std::string &text) {
  std::istringstream is(text);
  T value{};
  if constexpr (std::is_same_v<T, bool>) {
    std::string s;
    is >> s;
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError(where + ": expected a boolean, got '" + text + "'");
  } else if constexpr (std::is_same_v<T, std::string>) {
    return text;
  } else {
    is >> value;
    if (is.fail() || !(is >> std::ws).eof()) throw ConfigError(where + ": cannot parse '" + text + "'");
    return value;
  }
}

std::vector<double> parse_list(const std::string &where, const std::string &text) {
  std::vector<double> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, ',')) out.push_back(convert<double>(where, item));
  if (out.empty()) throw ConfigError(where + ": empty list");
  return out;
}

template <class T> T lookup(const pt::ptree &tree, const std::string &section, const std::string &key, const T &fallback) {
  const auto node = tree.get_child_optional(pt::ptree::path_type(section + "|" + key, '|'));
  if (!node) return fallback;
  return convert<T>(section + "." + key, node->data());
}

json config_echo(const ExperimentConfig &c) {
  json j = json::object();
  for (const auto &[section, body] : c.tree)
    for (const auto &[key, value] : body) j[section][key] = value.data();
  j["command"] = c.command;
  j["effective"] = {{"n", c.n}, {"resolution", c.resolution}, {"p", c.p}, {"density", c.density}, {"seed", c.seed}};
  return j;
}

void require(bool ok, const std::string &message) {
  if (!ok) throw ConfigError(message);
}

std::vector<double> read_numbers(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("density file not found: " + path.string());
  std::vector<double> v;
  std::string token;
  while (in >> token) {
    for (char &ch : token)
      if (ch == ',') ch = ' ';
    std::istringstream is(token);
    double x;
    while (is >> x) v.push_back(x);
    if (!is.eof()) throw ConfigError("density file " + path.string() + ": bad number '" + token + "'");
  }
  return v;
}

class Timer {
public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void finish_report(json &j, const ExperimentConfig &c, const Timer &timer) {
  j["command"] = c.command;
  j["config"] = config_echo(c);
  j["timing"]["wall_seconds"] = timer.seconds();
}

std::filesystem::path out(const ExperimentConfig &c, const std::string &name) { return c.output / name; }

void dump_solutions(const ExperimentConfig &c, const std::string &stem, const std::vector<SupportField> &solutions) {
  for (std::size_t k = 0; k < solutions.size(); ++k) {
    char name[64];
    std::snprintf(name, sizeof name, "%s_%03zu.json", stem.c_str(), k);
    io::write_atomic(out(c, std::string("solutions/") + name), io::dump(io::body_json(solutions[k])));
  }
}

// (n-1) - k(k+n-2) with multiplicity, even k <= k_max, descending.
std::vector<double> ball_spectrum(int n, int k_max) {
  std::vector<double> ev;
  for (int k = 0; k <= k_max; k += 2) {
    const int mult = n == 2 ? (k == 0 ? 1 : 2) : 2 * k + 1;
    for (int m = 0; m < mult; ++m) ev.push_back((n - 1) - k * (k + n - 2));
  }
  return ev;
}

GridPtr grid_of(const ExperimentConfig &c) { return make_grid(c.n, c.resolution); }

int cmd_solve(const ExperimentConfig &c) {
  const Timer timer;
  const GridPtr grid = grid_of(c);
  const Density d = parse_density(c.density, grid, c.p);
  SolveReport r;
  int code = kOk;
  try {
    r = solve_lp_minkowski(grid, d.values, c.p, std::nullopt, c.solver);
  } catch (const SolverError &e) {
    if (e.report) r = *e.report;
    r.converged = false;
    r.message = std::string(to_string(e.kind)) + ": " + e.what();
    code = kSolverFailure;
  }
  json j = io::report_json(r);
  if (d.exact && code == kOk) j["manufactured"]["hausdorff_error"] = hausdorff_distance_even(r.solution, *d.exact);
  if (code != kOk) j.erase("solution");
  finish_report(j, c, timer);
  io::write_atomic(out(c, "report.json"), io::dump(j));
  io::write_atomic(out(c, "trace.csv"), io::trace_csv(r));
  if (code == kOk) {
    io::write_atomic(out(c, "solution.json"), io::dump(io::body_json(r.solution)));
    io::write_atomic(out(c, "cone_volume.csv"), io::measure_csv(cone_volume_measure(r.solution)));
  } else {
    std::cerr << "solve failed: " << r.message << "\n";
  }
  return code;
}

int cmd_verify(const ExperimentConfig &c) {
  const Timer timer;
  VerifyOptions v;
  v.tolerance = c.get("tolerance", v.tolerance);
  v.recheck_band = c.get("recheck_band", v.recheck_band);
  v.near_ball = c.get("near_ball", v.near_ball);
  v.volume_fault = c.get("test_volume_fault", 1.0);
  v.workers = c.workers;
  require(v.tolerance > 0 && v.recheck_band > v.tolerance, "verify: need 0 < tolerance < recheck_band");
  require(v.volume_fault > 0, "verify.test_volume_fault must be positive");
  const std::string kind = c.get<std::string>("kind", "polytope");
  const int pairs = c.get("pairs", 100);
  require(pairs >= 1, "verify.pairs must be positive");
  const std::vector<double> lambdas = c.get_list("lambdas", {0.25, 0.5, 0.75});
  for (double l : lambdas) require(l >= 0 && l <= 1, "verify.lambdas must lie in [0,1]");
  BatchSummary s;
  if (kind == "polytope") {
    const int dim = c.get("dim", c.n);
    require(dim == 2 || dim == 3, "verify.dim must be 2 or 3");
    const std::vector<double> ps = c.p_list.empty() ? std::vector<double>{0.2, 0.6, 0.9} : c.p_list;
    for (double p : ps) require(p > 0 && p < 1, "verify: p must lie in (0,1)");
    s = polytope_battery(dim, pairs, ps, lambdas, c.seed, v, c.get("identical", false));
  } else if (kind == "log") {
    require(v.near_ball > 0 && v.near_ball < 0.5, "verify.near_ball must lie in (0, 0.5)");
    s = log_battery(grid_of(c), pairs, lambdas, c.seed, v);
  } else {
    throw ConfigError("verify.kind must be 'polytope' or 'log'");
  }
  json j = io::report_json(s);
  j["kind"] = kind;
  finish_report(j, c, timer);
  io::write_atomic(out(c, "summary.json"), io::dump(j));
  io::write_atomic(out(c, "batch.csv"), io::batch_csv(s));
  if (s.violations > 0) {
    std::cerr << "verify: " << s.violations << " violation(s), worst slack " << s.worst_slack << "\n";
    return kViolations;
  }
  return kOk;
}

int cmd_spectrum(const ExperimentConfig &c) {
  const Timer timer;
  const std::string body = c.get<std::string>("body", "ball");
  const int k_max = c.get("k_max", 4);
  require(k_max >= 0 && k_max % 2 == 0, "spectrum.k_max must be even and nonnegative");
  require(c.p >= 0 && c.p < 1, "problem.p must lie in [0,1)");
  SupportField h;
  if (body == "ball") {
    const GridPtr grid = grid_of(c);
    h = make_support_field(grid, Eigen::VectorXd::Ones(grid->size()));
  } else if (body.rfind("file:", 0) == 0) {
    std::ifstream in(body.substr(5));
    require(static_cast<bool>(in), "spectrum body file not found: " + body.substr(5));
    try {
      h = io::support_from_json(json::parse(in));
    } catch (const json::exception &e) {
      throw ConfigError(std::string("spectrum body file: ") + e.what());
    }
  } else {
    throw ConfigError("spectrum.body must be 'ball' or 'file:<path>'");
  }
  SpectrumReport r;
  try {
    r = spectrum(h, k_max, c.p);
  } catch (const std::runtime_error &e) {
    std::cerr << "spectrum failed: " << e.what() << "\n";
    return kSolverFailure;
  }
  json j = io::report_json(r);
  std::ostringstream csv;
  csv.precision(17);
  if (body == "ball") {
    const std::vector<double> exact = ball_spectrum(h.dim(), k_max);
    double worst = 0.0;
    for (std::size_t i = 0; i < exact.size() && i < r.eigenvalues.size(); ++i)
      worst = std::max(worst, std::abs(r.eigenvalues[i] - exact[i]) / std::abs(exact[i]));
    j["closed_form"] = exact;
    j["max_relative_error"] = worst;
    csv << "index,eigenvalue,closed_form\n";
    for (std::size_t i = 0; i < r.eigenvalues.size(); ++i)
      csv << i << ',' << r.eigenvalues[i] << ',' << (i < exact.size() ? exact[i] : NAN) << '\n';
  } else {
    csv << "index,eigenvalue\n";
    for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) csv << i << ',' << r.eigenvalues[i] << '\n';
  }
  finish_report(j, c, timer);
  io::write_atomic(out(c, "spectrum.json"), io::dump(j));
  io::write_atomic(out(c, "eigenvalues.csv"), csv.str());
  return kOk;
}

int cmd_continuation(const ExperimentConfig &c) {
  const Timer timer;
  const GridPtr grid = grid_of(c);
  ContinuationOptions o;
  o.solver = c.solver;
  o.max_bisections = c.get("max_bisections", 3);
  require(o.max_bisections >= 0, "continuation.max_bisections must be nonnegative");
  const std::string mode = c.get<std::string>("mode", "t");
  ContinuationTrace tr;
  try {
    if (mode == "t") {
      const int steps = c.get("steps", 50);
      require(steps >= 1, "continuation.steps must be positive");
      tr = continuation_run(grid, parse_density(c.density, grid, c.p).values, c.p, steps, o);
    } else if (mode == "p") {
      require(!c.p_list.empty(), "continuation mode p needs problem.p_list");
      tr = p_sweep(grid, parse_density(c.density, grid, c.p_list.front()).values, c.p_list, o);
    } else {
      throw ConfigError("continuation.mode must be 't' or 'p'");
    }
  } catch (const std::invalid_argument &e) {
    throw ConfigError(e.what());
  }
  json j = io::report_json(tr);
  finish_report(j, c, timer);
  io::write_atomic(out(c, "trace.json"), io::dump(j));
  io::write_atomic(out(c, "trace.csv"), io::continuation_csv(tr));
  if (c.get("dump_solutions", false)) dump_solutions(c, "solution", tr.solutions);
  if (!tr.completed) {
    std::cerr << "continuation: " << tr.message << "\n";
    return kSolverFailure;
  }
  return kOk;
}

int cmd_probe(const ExperimentConfig &c) {
  const Timer timer;
  const GridPtr grid = grid_of(c);
  ProbeOptions o;
  o.solver = c.solver;
  o.delta_cluster = c.get("delta_cluster", o.delta_cluster);
  o.amplitude = c.get("amplitude", o.amplitude);
  const int starts = c.get("starts", 20);
  require(starts >= 2, "probe.starts must be at least 2");
  require(o.delta_cluster > 0, "probe.delta_cluster must be positive");
  require(o.amplitude > 0 && o.amplitude <= 0.3, "probe.amplitude must lie in (0, 0.3]");
  const Density d = parse_density(c.density, grid, c.p);
  ClusterReport r;
  try {
    r = multiplicity_probe(grid, d.values, c.p, starts, c.seed, o);
  } catch (const std::invalid_argument &e) {
    throw ConfigError(e.what());
  } catch (const std::runtime_error &e) {
    std::cerr << "probe failed: " << e.what() << "\n";
    return kSolverFailure;
  }
  json j = io::report_json(r);
  finish_report(j, c, timer);
  io::write_atomic(out(c, "cluster.json"), io::dump(j));
  io::write_atomic(out(c, "cluster.csv"), io::cluster_csv(r));
  if (c.get("dump_solutions", false)) dump_solutions(c, "solution", r.solutions);
  return kOk;
}

int cmd_logsolve(const ExperimentConfig &c) {
  const Timer timer;
  const GridPtr grid = grid_of(c);
  const Density d = parse_density(c.density, grid, 0.0, true);
  const int starts = c.get("starts", 1);
  const double amplitude = c.get("amplitude", 0.3);
  require(starts >= 1, "logsolve.starts must be positive");
  require(amplitude > 0 && amplitude <= 0.3, "logsolve.amplitude must lie in (0, 0.3]");
  std::mt19937_64 rng(c.seed);
  const int n = grid->ambient_dim;
  const double radius = std::pow(n * integrate(*grid, d.values) / sphere_area(n), 1.0 / n);
  json runs = json::array();
  SolveReport first;
  bool have_first = false;
  int failures = 0;
  double spread = 0.0;
  for (int s = 0; s < starts; ++s) {
    std::optional<SupportField> init;
    if (s > 0) init = random_even_start(grid, radius, amplitude, 6, rng);
    json entry = {{"start", s}};
    try {
      const SolveReport r = solve_log_minkowski(grid, d.values, init, c.solver);
      entry["converged"] = true;
      entry["residual_sup"] = r.residual_sup;
      entry["iterations"] = r.iterations;
      if (!have_first) {
        first = r;
        have_first = true;
      }
      const double dist = hausdorff_distance_even(r.solution, first.solution);
      entry["distance_to_first"] = dist;
      spread = std::max(spread, dist);
      if (d.exact) entry["hausdorff_error"] = hausdorff_distance_even(r.solution, *d.exact);
    } catch (const SolverError &e) {
      ++failures;
      entry["converged"] = false;
      entry["message"] = std::string(to_string(e.kind)) + ": " + e.what();
    }
    runs.push_back(entry);
  }
  json j = have_first ? io::report_json(first) : json::object();
  j["starts"] = runs;
  j["failures"] = failures;
  j["max_distance_to_first"] = spread;
  j["seed"] = c.seed;
  finish_report(j, c, timer);
  io::write_atomic(out(c, "report.json"), io::dump(j));
  if (!have_first || failures > 0) {
    std::cerr << "logsolve: " << failures << " of " << starts << " start(s) failed\n";
    return kSolverFailure;
  }
  io::write_atomic(out(c, "trace.csv"), io::trace_csv(first));
  io::write_atomic(out(c, "solution.json"), io::dump(io::body_json(first.solution)));
  return kOk;
}

} // namespace

template <class T> T ExperimentConfig::get(const std::string &key, const T &fallback) const {
  return lookup<T>(tree, command, key, fallback);
}
template int ExperimentConfig::get<int>(const std::string &, const int &) const;
template double ExperimentConfig::get<double>(const std::string &, const double &) const;
template bool ExperimentConfig::get<bool>(const std::string &, const bool &) const;
template std::string ExperimentConfig::get<std::string>(const std::string &, const std::string &) const;

std::vector<double> ExperimentConfig::get_list(const std::string &key, const std::vector<double> &fallback) const {
  const auto text = lookup<std::string>(tree, command, key, "");
  return text.empty() ? fallback : parse_list(command + "." + key, text);
}

ExperimentConfig parse_config(const std::string &command, std::istream &in) {
  if (!kSchema.count(command) || command == "grid" || command == "problem" || command == "solver" || command == "run")
    throw ConfigError("unknown command '" + command + "'");
  ExperimentConfig c;
  c.command = command;
  try {
    pt::ini_parser::read_ini(in, c.tree);
  } catch (const pt::ini_parser_error &e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  for (const auto &[section, body] : c.tree) {
    const auto it = kSchema.find(section);
    if (it == kSchema.end()) throw ConfigError("unknown section [" + section + "]");
    if (!body.data().empty()) throw ConfigError("key '" + section + "' outside any section");
    for (const auto &[key, value] : body)
      if (!it->second.count(key)) throw ConfigError("unknown key " + section + "." + key);
  }
  c.n = lookup(c.tree, "grid", "n", 2);
  require(c.n == 2 || c.n == 3, "grid.n must be 2 or 3");
  c.resolution = lookup(c.tree, "grid", "resolution", c.n == 2 ? 256 : 16);
  require(c.resolution >= 4, "grid.resolution must be at least 4");
  c.p = lookup(c.tree, "problem", "p", 0.8);
  const std::string plist = lookup<std::string>(c.tree, "problem", "p_list", "");
  if (!plist.empty()) c.p_list = parse_list("problem.p_list", plist);
  c.density = lookup<std::string>(c.tree, "problem", "density", "constant:1");
  c.seed = lookup<std::uint64_t>(c.tree, "run", "seed", 0);
  c.workers = lookup(c.tree, "run", "workers", 1);
  require(c.workers >= 1, "run.workers must be positive");
  c.output = lookup<std::string>(c.tree, "run", "output", ".");
  c.solver.tolerance = lookup(c.tree, "solver", "tolerance", 0.0);
  c.solver.max_iterations = lookup(c.tree, "solver", "max_iterations", 200);
  c.solver.max_halvings = lookup(c.tree, "solver", "max_halvings", 20);
  require(c.solver.tolerance >= 0, "solver.tolerance must be positive");
  require(c.solver.max_iterations >= 1 && c.solver.max_halvings >= 1, "solver iteration limits must be positive");
  if (command != "spectrum" && command != "verify") require(c.p >= 0 && c.p < 1, "problem.p must lie in [0,1)");
  return c;
}

ExperimentConfig load_config(const std::string &command, const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path.string());
  return parse_config(command, in);
}

Density parse_density(const std::string &spec, const GridPtr &grid, double p, bool cone_volume) {
  const SphereGrid &g = *grid;
  const int n = g.ambient_dim;
  const auto colon = spec.find(':');
  require(colon != std::string::npos, "density spec '" + spec + "' has no ':'");
  const std::string kind = spec.substr(0, colon), arg = spec.substr(colon + 1);
  Density d;
  if (kind == "constant") {
    d.values = Eigen::VectorXd::Constant(g.size(), convert<double>("density", arg));
  } else if (kind == "harmonic") {
    const std::vector<double> coef = parse_list("density", arg);
    d.values = Eigen::VectorXd::Zero(g.size());
    for (Eigen::Index i = 0; i < g.size(); ++i)
      for (std::size_t k = 0; k < coef.size(); ++k)
        d.values[i] += coef[k] * (n == 2 ? std::cos(2.0 * k * node_angle(g, i))
                                         : std::legendre(static_cast<unsigned>(2 * k), std::clamp(g.nodes(2, i), -1.0, 1.0)));
  } else if (kind == "file") {
    const std::vector<double> v = read_numbers(arg);
    require(static_cast<Eigen::Index>(v.size()) == g.size(),
            "density file has " + std::to_string(v.size()) + " values, grid has " + std::to_string(g.size()));
    d.values = Eigen::Map<const Eigen::VectorXd>(v.data(), g.size());
    require(d.values.allFinite(), "density file contains non-finite values");
    require(oddness(g, d.values) <= 1e-12 * d.values.cwiseAbs().maxCoeff(), "density file is not even");
  } else if (kind == "manufactured") {
    require(arg.rfind("ellipsoid:", 0) == 0, "manufactured density must be 'manufactured:ellipsoid:a,b[,c]'");
    const std::vector<double> axes = parse_list("density", arg.substr(10));
    require(static_cast<int>(axes.size()) == n, "manufactured ellipsoid needs one semi-axis per dimension");
    for (double a : axes) require(a > 0, "ellipsoid semi-axes must be positive");
    const Eigen::Map<const Eigen::VectorXd> a(axes.data(), n);
    d.exact = make_support_field(grid, sample(g, [&](const Eigen::VectorXd &x) { return a.cwiseProduct(x).norm(); }));
    const Eigen::VectorXd det = surface_area_measure(*d.exact).masses.cwiseQuotient(g.weights);
    d.values = cone_volume ? Eigen::VectorXd(d.exact->values.cwiseProduct(det) / n)
                           : Eigen::VectorXd(det.cwiseProduct(d.exact->values.array().pow(1.0 - p).matrix()));
  } else {
    throw ConfigError("unknown density kind '" + kind + "'");
  }
  require(d.values.allFinite() && d.values.minCoeff() > 0.0, "density must be positive at every node");
  return d;
}

int run(const ExperimentConfig &c) {
  if (c.command == "solve") return cmd_solve(c);
  if (c.command == "verify") return cmd_verify(c);
  if (c.command == "spectrum") return cmd_spectrum(c);
  if (c.command == "continuation") return cmd_continuation(c);
  if (c.command == "probe") return cmd_probe(c);
  if (c.command == "logsolve") return cmd_logsolve(c);
  throw ConfigError("unknown command '" + c.command + "'");
}

} // namespace lpbm::cli
