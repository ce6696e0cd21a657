#pragma once

#include "lpbm/continuation.hpp"
#include "lpbm/solver.hpp"
#include "lpbm/verify.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace lpbm::io {

using json = nlohmann::json;

json grid_json(const SphereGrid &grid);

/// {"kind": "support", "grid": {ambient_dim, resolution}, "values": [...]}
json body_json(const SupportField &h);
/// {"kind": "polytope", "dim": n, "halfspaces": [{"normal": [...], "offset": c}, ...]}
json body_json(const PolytopeBody &body);

/// Rebuilds the grid from (ambient_dim, resolution).
SupportField support_from_json(const json &j);
PolytopeBody polytope_from_json(const json &j);

// Reports. Wall-clock data goes under the "timing" key only, so two runs of
// the same configuration agree byte for byte once "timing" is dropped.
json report_json(const SolveReport &r);
json report_json(const SpectrumReport &r);
json report_json(const ContinuationTrace &r);
json report_json(const ClusterReport &r);
json report_json(const InequalityReport &r);
json report_json(const BatchSummary &r);
json report_json(const VariationalReport &r);

/// iter,residual_sup,damping,margin,sigma_min
std::string trace_csv(const SolveReport &r);
/// node,x0,x1[,x2],mass
std::string measure_csv(const DiscreteMeasure &m);
std::string continuation_csv(const ContinuationTrace &r);
/// start,converged,cluster,distance_to_representative,message
std::string cluster_csv(const ClusterReport &r);
/// pair,kind,p,lambda,lhs,rhs,slack,verdict
std::string batch_csv(const BatchSummary &r);

/// Two-space indented JSON with a trailing newline.
std::string dump(const json &j);

/// Writes to a temporary sibling and renames it into place.
void write_atomic(const std::filesystem::path &path, const std::string &content);

} // namespace lpbm::io
