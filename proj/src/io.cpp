#include "lpbm/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace lpbm::io {

namespace {

json vec(const Eigen::Ref<const Eigen::VectorXd> &v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json columns(const Eigen::MatrixXd &m) {
  json out = json::array();
  for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(vec(m.col(j)));
  return out;
}

std::ostringstream csv_stream() {
  std::ostringstream os;
  os << std::setprecision(17);
  return os;
}

json grid_ref(const SphereGrid &g) { return {{"ambient_dim", g.ambient_dim}, {"resolution", g.resolution}}; }

} // namespace

json grid_json(const SphereGrid &grid) {
  json j = grid_ref(grid);
  j["nodes"] = columns(grid.nodes);
  j["weights"] = vec(grid.weights);
  j["antipode"] = grid.antipode;
  return j;
}

json body_json(const SupportField &h) {
  return {{"kind", "support"}, {"grid", grid_ref(*h.grid)}, {"values", vec(h.values)}};
}

json body_json(const PolytopeBody &body) {
  json hs = json::array();
  for (Eigen::Index k = 0; k < body.normals.cols(); ++k)
    hs.push_back({{"normal", vec(body.normals.col(k))}, {"offset", body.offsets[k]}});
  return {{"kind", "polytope"}, {"dim", body.dim}, {"halfspaces", hs}};
}

SupportField support_from_json(const json &j) {
  if (j.at("kind") != "support") throw std::invalid_argument("support_from_json: kind is not \"support\"");
  const GridPtr grid = make_grid(j.at("grid").at("ambient_dim").get<int>(), j.at("grid").at("resolution").get<int>());
  const auto values = j.at("values").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(values.size()) != grid->size())
    throw std::invalid_argument("support_from_json: value count does not match the grid");
  return make_support_field(grid, Eigen::Map<const Eigen::VectorXd>(values.data(), grid->size()));
}

PolytopeBody polytope_from_json(const json &j) {
  if (j.at("kind") != "polytope") throw std::invalid_argument("polytope_from_json: kind is not \"polytope\"");
  const int dim = j.at("dim").get<int>();
  const json &hs = j.at("halfspaces");
  Eigen::MatrixXd U(dim, hs.size());
  Eigen::VectorXd c(hs.size());
  for (std::size_t k = 0; k < hs.size(); ++k) {
    const auto u = hs[k].at("normal").get<std::vector<double>>();
    if (static_cast<int>(u.size()) != dim) throw std::invalid_argument("polytope_from_json: normal of wrong length");
    U.col(static_cast<Eigen::Index>(k)) = Eigen::Map<const Eigen::VectorXd>(u.data(), dim);
    c[static_cast<Eigen::Index>(k)] = hs[k].at("offset").get<double>();
  }
  return polytope_from_halfspaces(U, c);
}

json report_json(const SolveReport &r) {
  json trace = json::array();
  for (const IterationRecord &t : r.trace)
    trace.push_back({{"iter", t.iteration},
                     {"residual_sup", t.residual_sup},
                     {"damping", t.damping},
                     {"margin", t.margin},
                     {"sigma_min", t.sigma_min}});
  json j = {{"converged", r.converged},
            {"p", r.p},
            {"residual_sup", r.residual_sup},
            {"tolerance", r.tolerance},
            {"iterations", r.iterations},
            {"convexity_margin", r.convexity_margin},
            {"sigma_min", r.sigma_min},
            {"message", r.message},
            {"trace", trace},
            {"timing", {{"wall_seconds", r.wall_seconds}}}};
  if (r.solution.grid) j["solution"] = body_json(r.solution);
  return j;
}

json report_json(const SpectrumReport &r) {
  return {{"p", r.p},
          {"eigenvalues", r.eigenvalues},
          {"max_imaginary", r.max_imaginary},
          {"sigma_min", r.sigma_min},
          {"margin", r.margin},
          {"nearest_eigenvalue", r.nearest_eigenvalue}};
}

json report_json(const ContinuationTrace &r) {
  return {{"parameter", r.parameter},
          {"p", r.p},
          {"values", r.values},
          {"residual", r.residual},
          {"sigma_min", r.sigma_min},
          {"step_distance", r.step_distance},
          {"iterations", r.iterations},
          {"completed", r.completed},
          {"last_good", r.last_good},
          {"message", r.message}};
}

json report_json(const ClusterReport &r) {
  json d = json::array();
  for (Eigen::Index i = 0; i < r.distances.rows(); ++i) d.push_back(vec(r.distances.row(i).transpose()));
  return {{"seed", r.seed},
          {"n_starts", r.n_starts},
          {"converged", std::vector<bool>(r.converged.begin(), r.converged.end())},
          {"failures", r.failures},
          {"converged_index", r.converged_index},
          {"delta_cluster", r.delta_cluster},
          {"cluster_of", r.cluster_of},
          {"representatives", r.representatives},
          {"cluster_count", r.cluster_count()},
          {"distances", d}};
}

json report_json(const InequalityReport &r) {
  json rows = json::array();
  for (const InequalityRow &w : r.rows)
    rows.push_back({{"lambda", w.lambda},
                    {"lhs", w.lhs},
                    {"rhs", w.rhs},
                    {"slack", w.slack},
                    {"raw_volume", w.raw_volume},
                    {"rhs_geometric", w.rhs_geometric},
                    {"rhs_pmean", w.rhs_pmean},
                    {"slack_pmean", w.slack_pmean}});
  return {{"kind", r.kind},
          {"body_k", r.body_k},
          {"body_l", r.body_l},
          {"p", r.p},
          {"tolerance", r.tolerance},
          {"lhs", r.lhs},
          {"rhs", r.rhs},
          {"slack", r.slack},
          {"power_mean_ordered", r.power_mean_ordered},
          {"rechecked", r.rechecked},
          {"holds", r.holds},
          {"rows", rows}};
}

json report_json(const BatchSummary &r) {
  return {{"seed", r.seed},
          {"pairs", r.pairs},
          {"checks", r.checks},
          {"violations", r.violations},
          {"rechecks", r.rechecks},
          {"worst_slack", r.worst_slack}};
}

json report_json(const VariationalReport &r) {
  json j = {{"objective", r.objective},
            {"objective_start", r.objective_start},
            {"objective_at_k", r.objective_at_k},
            {"optimality_residual", r.optimality_residual},
            {"stationarity", r.stationarity},
            {"volume", r.volume},
            {"iterations", r.iterations},
            {"converged", r.converged},
            {"residual_history", r.residual_history},
            {"message", r.message}};
  if (r.minimizer.grid) j["minimizer"] = body_json(r.minimizer);
  return j;
}

std::string trace_csv(const SolveReport &r) {
  auto os = csv_stream();
  os << "iter,residual_sup,damping,margin,sigma_min\n";
  for (const IterationRecord &t : r.trace)
    os << t.iteration << ',' << t.residual_sup << ',' << t.damping << ',' << t.margin << ',' << t.sigma_min << '\n';
  return os.str();
}

std::string measure_csv(const DiscreteMeasure &m) {
  auto os = csv_stream();
  const SphereGrid &g = *m.grid;
  os << "node";
  for (int i = 0; i < g.ambient_dim; ++i) os << ",x" << i;
  os << ",mass\n";
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    os << k;
    for (int i = 0; i < g.ambient_dim; ++i) os << ',' << g.nodes(i, k);
    os << ',' << m.masses[k] << '\n';
  }
  return os.str();
}

std::string continuation_csv(const ContinuationTrace &r) {
  auto os = csv_stream();
  os << r.parameter << ",residual,sigma_min,step_distance,iterations\n";
  for (std::size_t k = 0; k < r.values.size(); ++k)
    os << r.values[k] << ',' << r.residual[k] << ',' << r.sigma_min[k] << ',' << r.step_distance[k] << ','
       << r.iterations[k] << '\n';
  return os.str();
}

std::string cluster_csv(const ClusterReport &r) {
  auto os = csv_stream();
  os << "start,converged,cluster,distance_to_representative,message\n";
  std::size_t s = 0;
  for (int i = 0; i < r.n_starts; ++i) {
    os << i << ',' << (r.converged[i] ? 1 : 0) << ',';
    if (r.converged[i]) {
      const int c = r.cluster_of[s];
      os << c << ',' << r.distances(static_cast<Eigen::Index>(s), r.representatives[c]) << ",";
      ++s;
    } else {
      std::string msg = r.failures[i];
      for (char &ch : msg)
        if (ch == ',' || ch == '\n') ch = ';';
      os << ",," << msg;
    }
    os << '\n';
  }
  return os.str();
}

std::string batch_csv(const BatchSummary &r) {
  auto os = csv_stream();
  os << "pair,kind,p,lambda,lhs,rhs,slack,verdict\n";
  for (const BatchRow &w : r.rows)
    os << w.pair << ',' << w.kind << ',' << w.p << ',' << w.lambda << ',' << w.lhs << ',' << w.rhs << ',' << w.slack << ','
       << (w.holds ? "holds" : "violated") << '\n';
  return os.str();
}

std::string dump(const json &j) { return j.dump(2) + "\n"; }

void write_atomic(const std::filesystem::path &path, const std::string &content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw std::filesystem::filesystem_error("write_atomic: rename failed", tmp, path, ec);
  }
}

} // namespace lpbm::io
