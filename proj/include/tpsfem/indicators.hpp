#pragma once

#include <string>
#include <vector>

#include "tpsfem/assembly.hpp"
#include "tpsfem/data.hpp"
#include "tpsfem/mesh.hpp"
#include "tpsfem/solver.hpp"

namespace tpsfem {

enum class IndicatorKind { regression, auxiliary, residual, recovery, norm };

std::string to_string(IndicatorKind kind);
IndicatorKind parse_indicator(const std::string& s);

/// Error-indicator values on base and interface base-edges.
struct IndicatorField {
  IndicatorKind kind = IndicatorKind::recovery;
  /// Indexed by edge id; NaN where no value is defined.
  std::vector<double> values;
  /// Edges without data in tau_e (regression indicator only).
  std::vector<EdgeId> no_data;
  /// Edges whose local computation failed; they carry no value.
  std::vector<EdgeId> failed;

  bool has(EdgeId e) const;
  double at(EdgeId e) const { return values[e]; }
  void set(EdgeId e, double v);
  /// Edge ids with a defined value, ascending.
  std::vector<EdgeId> edges() const;
};

/// Everything an indicator may read. `smoother` holds nodal values for every
/// node of `mesh`; `buckets` must match `mesh`.
struct IndicatorContext {
  const TriMesh* mesh = nullptr;
  const Smoother* smoother = nullptr;
  const ScatteredData* data = nullptr;
  const DataBuckets* buckets = nullptr;
  /// Global data count used to normalise the residual indicator's data term.
  int n_total = 0;
  double alpha = 0.0;
  double c1 = 1.0;
  double c2 = 1.0;
};

/// Triangles sharing edge e (one or two).
std::vector<TriId> edge_triangles(const TriMesh& mesh, EdgeId e);

/// Local grid built around edge e: every active triangle sharing a node with
/// tau_e, with e bisected; boundary values lifted from the global solution
/// (the inserted midpoint takes endpoint averages).
struct LocalProblem {
  TriMesh mesh;
  /// Global node of each local node; kNone for the midpoint.
  std::vector<NodeId> global_node;
  NodeId midpoint = kNone;
  /// Local children of tau_e with the global triangle each came from.
  std::vector<std::pair<TriId, TriId>> inner;
  ScatteredData data;
  DataBuckets buckets;
  /// Interpolated global solution on the local nodes, per field.
  Vector c, g1, g2, w;
  std::vector<bool> boundary;
};

LocalProblem build_local_problem(const IndicatorContext& ctx, EdgeId e);

double eta_regression(const IndicatorContext& ctx, EdgeId e, bool* no_data = nullptr);
double eta_auxiliary(const IndicatorContext& ctx, EdgeId e);
double eta_residual(const IndicatorContext& ctx, EdgeId e);

/// L2-projected nodal gradient of the piecewise-linear field c.
struct RecoveredGradient {
  Vector d1;
  Vector d2;
};
RecoveredGradient recover_gradient(const TriMesh& mesh, const Vector& c);

/// Nodal second derivatives from projecting the recovered gradient again.
/// The mixed derivative averages the two available projections.
struct RecoveredHessian {
  Vector d11;
  Vector d12;
  Vector d22;
};
RecoveredHessian recover_hessian(const TriMesh& mesh, const Vector& c);

double eta_recovery(const TriMesh& mesh, const Vector& c, const RecoveredGradient& g, EdgeId e);
double eta_norm(const TriMesh& mesh, const RecoveredHessian& hess, EdgeId e);

/// Squared-jump sum over the edges of tau_e: sum_E |E| j_E^2 with j_E the
/// normal-gradient jump on interior edges, 0 on Dirichlet edges and
/// -n . grad s on Neumann edges.
double jump_norm_sq(const TriMesh& mesh, const Vector& c, EdgeId e);

/// Indicator values for the given edges (refinable edges when empty).
IndicatorField compute_indicators(IndicatorKind kind, const IndicatorContext& ctx,
                                  const std::vector<EdgeId>& edges = {});

/// Edges along which a bisection is currently legal.
std::vector<EdgeId> refinable_edges(const TriMesh& mesh);

}  // namespace tpsfem
