#include "tpsfem/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/IterativeLinearSolvers>

#include "tpsfem/element.hpp"
#include "tpsfem/error.hpp"

namespace tpsfem {

std::string to_string(IndicatorKind kind) {
  switch (kind) {
    case IndicatorKind::regression: return "regression";
    case IndicatorKind::auxiliary: return "auxiliary";
    case IndicatorKind::residual: return "residual";
    case IndicatorKind::recovery: return "recovery";
    case IndicatorKind::norm: return "norm";
  }
  return "unknown";
}

IndicatorKind parse_indicator(const std::string& s) {
  for (IndicatorKind k : {IndicatorKind::regression, IndicatorKind::auxiliary, IndicatorKind::residual,
                          IndicatorKind::recovery, IndicatorKind::norm}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown indicator '" + s + "' (expected regression|auxiliary|residual|recovery|norm)");
}

bool IndicatorField::has(EdgeId e) const {
  return e >= 0 && e < static_cast<EdgeId>(values.size()) && !std::isnan(values[e]);
}

void IndicatorField::set(EdgeId e, double v) {
  if (e >= static_cast<EdgeId>(values.size())) values.resize(e + 1, std::numeric_limits<double>::quiet_NaN());
  values[e] = v;
}

std::vector<EdgeId> IndicatorField::edges() const {
  std::vector<EdgeId> out;
  for (EdgeId e = 0; e < static_cast<EdgeId>(values.size()); ++e)
    if (!std::isnan(values[e])) out.push_back(e);
  return out;
}

std::vector<TriId> edge_triangles(const TriMesh& mesh, EdgeId e) {
  std::vector<TriId> out;
  for (TriId t : mesh.edge(e).tris)
    if (t != kNone) out.push_back(t);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<EdgeId> refinable_edges(const TriMesh& mesh) {
  std::vector<EdgeId> out;
  for (EdgeId e : mesh.active_edges())
    if (mesh.is_refinable(e)) out.push_back(e);
  return out;
}

namespace {

TriId child_containing(const TriMesh& mesh, TriId parent, const Point& p) {
  const auto& ch = mesh.triangle(parent).children;
  for (TriId c : ch)
    if (triangle_contains(mesh, c, p)) return c;
  TriId best = ch[0];
  double best_min = -std::numeric_limits<double>::infinity();
  for (TriId c : ch) {
    const auto& v = mesh.triangle(c).nodes;
    const double m = barycentric<double>(mesh.node(v[0]), mesh.node(v[1]), mesh.node(v[2]), p).minCoeff();
    if (m > best_min) {
      best_min = m;
      best = c;
    }
  }
  return best;
}

}  // namespace

LocalProblem build_local_problem(const IndicatorContext& ctx, EdgeId e) {
  const TriMesh& mesh = *ctx.mesh;
  const Smoother& s = *ctx.smoother;
  const auto tau = edge_triangles(mesh, e);

  std::vector<TriId> patch;
  for (TriId t : tau)
    for (NodeId v : mesh.triangle(t).nodes)
      for (TriId u : mesh.node_triangles(v)) patch.push_back(u);
  std::sort(patch.begin(), patch.end());
  patch.erase(std::unique(patch.begin(), patch.end()), patch.end());

  LocalProblem lp;
  std::map<NodeId, NodeId> local_of;
  std::vector<Point> points;
  for (TriId t : patch) {
    for (NodeId v : mesh.triangle(t).nodes) {
      if (local_of.emplace(v, static_cast<NodeId>(points.size())).second) {
        points.push_back(mesh.node(v));
        lp.global_node.push_back(v);
      }
    }
  }
  std::vector<ElementSpec> elements;
  elements.reserve(patch.size());
  for (TriId t : patch) {
    const auto& v = mesh.triangle(t).nodes;
    elements.push_back({{local_of[v[0]], local_of[v[1]], local_of[v[2]]}, mesh.triangle(t).level});
  }
  lp.mesh = TriMesh::from_elements(std::move(points), elements, BoundaryKind::dirichlet);

  const auto& en = mesh.edge(e).nodes;
  const auto local_edge = lp.mesh.find_edge(local_of[en[0]], local_of[en[1]]);
  if (!local_edge) throw IndicatorError("local grid lost edge " + std::to_string(e));
  const auto delta = lp.mesh.split_edge_unchecked(*local_edge);
  lp.midpoint = delta.new_nodes.front();
  lp.global_node.push_back(kNone);

  auto local_index = [&](TriId global) {
    return static_cast<TriId>(std::lower_bound(patch.begin(), patch.end(), global) - patch.begin());
  };
  for (TriId t : tau) {
    for (TriId child : lp.mesh.triangle(local_index(t)).children) lp.inner.emplace_back(child, t);
  }

  // Local data: everything bucketed in the patch, re-homed into the children
  // of tau_e where needed.
  const DataBuckets& gb = *ctx.buckets;
  std::vector<int> indices;
  std::vector<TriId> owners;
  for (TriId t : patch) {
    const TriId lt = local_index(t);
    const bool split = !lp.mesh.triangle(lt).active;
    for (int i : gb.members[t]) {
      indices.push_back(i);
      owners.push_back(split ? child_containing(lp.mesh, lt, ctx.data->points[i]) : lt);
    }
  }
  lp.data = ctx.data->subset(indices);
  lp.buckets.owner = owners;
  lp.buckets.members.assign(static_cast<std::size_t>(lp.mesh.triangle_capacity()), {});
  for (std::size_t k = 0; k < owners.size(); ++k) lp.buckets.members[owners[k]].push_back(static_cast<int>(k));

  const int lm = lp.mesh.node_count();
  auto lift = [&](const Vector& global) {
    Vector out(lm);
    for (NodeId p = 0; p < lm; ++p) {
      const NodeId g = lp.global_node[p];
      out[p] = g != kNone ? global[g] : 0.5 * (global[en[0]] + global[en[1]]);
    }
    return out;
  };
  lp.c = lift(s.c);
  lp.g1 = lift(s.g1);
  lp.g2 = lift(s.g2);
  lp.w = lift(s.w);
  lp.boundary = lp.mesh.boundary_node_mask();
  return lp;
}

double eta_regression(const IndicatorContext& ctx, EdgeId e, bool* no_data) {
  const TriMesh& mesh = *ctx.mesh;
  double sum = 0.0;
  int count = 0;
  for (TriId t : edge_triangles(mesh, e)) {
    const auto& v = mesh.triangle(t).nodes;
    for (int i : ctx.buckets->members[t]) {
      const Point& x = ctx.data->points[i];
      const Eigen::Vector3d l = barycentric<double>(mesh.node(v[0]), mesh.node(v[1]), mesh.node(v[2]), x);
      const double fit = l[0] * ctx.smoother->c[v[0]] + l[1] * ctx.smoother->c[v[1]] + l[2] * ctx.smoother->c[v[2]];
      const double r = fit - ctx.data->y[i];
      sum += r * r;
      ++count;
    }
  }
  if (no_data) *no_data = count == 0;
  return count == 0 ? 0.0 : std::sqrt(sum / count);
}

namespace {

std::map<NodeId, std::array<double, 4>> lifted_boundary(const LocalProblem& lp) {
  std::map<NodeId, std::array<double, 4>> values;
  for (NodeId p = 0; p < lp.mesh.node_count(); ++p)
    if (lp.boundary[p]) values[p] = {lp.c[p], lp.g1[p], lp.g2[p], lp.w[p]};
  return values;
}

}  // namespace

double eta_auxiliary(const IndicatorContext& ctx, EdgeId e) {
  const LocalProblem lp = build_local_problem(ctx, e);
  const BasisSamples samples = basis_samples(lp.mesh, lp.data, lp.buckets);
  const int ne = lp.data.size();
  TpsfemSystem sys = assemble_system(lp.mesh, samples, lp.data.y, ne > 0 ? 1.0 / ne : 1.0);
  apply_dirichlet(sys, lp.mesh, lifted_boundary(lp));
  const Vector x = solve_dense(sys, ctx.alpha);
  const Vector local_c = x.head(sys.m);

  double eta2 = 0.0;
  for (const auto& [child, parent] : lp.inner) {
    const Point diff = element_gradient(*ctx.mesh, ctx.smoother->c, parent) - element_gradient(lp.mesh, local_c, child);
    eta2 += triangle_area(lp.mesh, child) * diff.squaredNorm();
  }
  return std::sqrt(eta2);
}

double jump_norm_sq(const TriMesh& mesh, const Vector& c, EdgeId e) {
  std::vector<EdgeId> edges;
  for (TriId t : edge_triangles(mesh, e))
    for (EdgeId f : mesh.triangle(t).edges) edges.push_back(f);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  double total = 0.0;
  for (EdgeId f : edges) {
    const Edge& edge = mesh.edge(f);
    if (edge.on_boundary && edge.boundary_kind == BoundaryKind::dirichlet) continue;
    const Point a = mesh.node(edge.nodes[0]);
    const Point b = mesh.node(edge.nodes[1]);
    const double len = (b - a).norm();
    Point normal((b - a).y() / len, -(b - a).x() / len);
    const TriId t0 = edge.tris[0];
    // Orient the normal out of t0: its opposite vertex lies on the inner side.
    const auto& v0 = mesh.triangle(t0).nodes;
    const Point centroid = (mesh.node(v0[0]) + mesh.node(v0[1]) + mesh.node(v0[2])) / 3.0;
    if (normal.dot(centroid - a) > 0) normal = -normal;
    double j = normal.dot(element_gradient(mesh, c, t0));
    if (edge.on_boundary) {
      j = -j;
    } else {
      j -= normal.dot(element_gradient(mesh, c, edge.tris[1]));
    }
    total += len * j * j;
  }
  return total;
}

double eta_residual(const IndicatorContext& ctx, EdgeId e) {
  const LocalProblem lp = build_local_problem(ctx, e);
  const BasisSamples samples = basis_samples(lp.mesh, lp.data, lp.buckets);
  const TpsfemSystem sys = assemble_system(lp.mesh, samples, lp.data.y, 1.0 / ctx.n_total);
  Vector r = sys.A * lp.c + sys.L * lp.w - sys.d;
  for (NodeId p = 0; p < sys.m; ++p)
    if (lp.boundary[p]) r[p] = 0.0;
  const double r_norm2 = r.dot(assemble_mass(lp.mesh) * r);

  double h = 0.0;
  for (TriId t : edge_triangles(*ctx.mesh, e)) h = std::max(h, triangle_diameter(*ctx.mesh, t));
  const double jump2 = jump_norm_sq(*ctx.mesh, ctx.smoother->c, e);
  return std::sqrt(ctx.c1 * h * h * r_norm2 + ctx.c2 * h * jump2);
}

namespace {

Vector solve_mass(const SparseMatrix& M, const Vector& rhs) {
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(1e-14);
  cg.setMaxIterations(std::max<int>(200, static_cast<int>(M.rows())));
  cg.compute(M);
  Vector x = cg.solve(rhs);
  if (cg.info() != Eigen::Success && cg.error() > 1e-10) {
    throw IndicatorError("mass-matrix projection did not converge (error " + std::to_string(cg.error()) + ")");
  }
  return x;
}

/// L2 projection of the piecewise-constant gradient of the nodal field f.
RecoveredGradient project_gradient(const TriMesh& mesh, const SparseMatrix& M, const Vector& f) {
  Vector r1 = Vector::Zero(mesh.node_count());
  Vector r2 = Vector::Zero(mesh.node_count());
  for (TriId t : mesh.active_triangles()) {
    const Point g = element_gradient(mesh, f, t);
    const double third = triangle_area(mesh, t) / 3.0;
    for (NodeId v : mesh.triangle(t).nodes) {
      r1[v] += third * g.x();
      r2[v] += third * g.y();
    }
  }
  return {solve_mass(M, r1), solve_mass(M, r2)};
}

}  // namespace

RecoveredGradient recover_gradient(const TriMesh& mesh, const Vector& c) {
  return project_gradient(mesh, assemble_mass(mesh), c);
}

RecoveredHessian recover_hessian(const TriMesh& mesh, const Vector& c) {
  const SparseMatrix M = assemble_mass(mesh);
  const RecoveredGradient g = project_gradient(mesh, M, c);
  const RecoveredGradient h1 = project_gradient(mesh, M, g.d1);
  const RecoveredGradient h2 = project_gradient(mesh, M, g.d2);
  return {h1.d1, 0.5 * (h1.d2 + h2.d1), h2.d2};
}

double eta_recovery(const TriMesh& mesh, const Vector& c, const RecoveredGradient& g, EdgeId e) {
  double eta2 = 0.0;
  for (TriId t : edge_triangles(mesh, e)) {
    const auto& v = mesh.triangle(t).nodes;
    const Point grad = element_gradient(mesh, c, t);
    const double area = triangle_area(mesh, t);
    for (int k = 0; k < 2; ++k) {
      const Vector& rec = k == 0 ? g.d1 : g.d2;
      double sum = 0.0;
      double sum_sq = 0.0;
      for (NodeId p : v) {
        const double f = rec[p] - grad[k];
        sum += f;
        sum_sq += f * f;
      }
      eta2 += area / 12.0 * (sum_sq + sum * sum);
    }
  }
  return std::sqrt(eta2);
}

double eta_norm(const TriMesh& mesh, const RecoveredHessian& hess, EdgeId e) {
  double eta = 0.0;
  for (TriId t : edge_triangles(mesh, e)) {
    double mean = 0.0;
    for (NodeId p : mesh.triangle(t).nodes) {
      mean += std::max({std::abs(hess.d11[p]), std::abs(hess.d12[p]), std::abs(hess.d22[p])}) / 3.0;
    }
    eta += triangle_area(mesh, t) * mean;
  }
  return eta;
}

IndicatorField compute_indicators(IndicatorKind kind, const IndicatorContext& ctx, const std::vector<EdgeId>& edges) {
  const TriMesh& mesh = *ctx.mesh;
  const std::vector<EdgeId> targets = edges.empty() ? refinable_edges(mesh) : edges;
  IndicatorField field;
  field.kind = kind;
  field.values.assign(static_cast<std::size_t>(mesh.edge_capacity()), std::numeric_limits<double>::quiet_NaN());

  RecoveredGradient grad;
  RecoveredHessian hess;
  if (kind == IndicatorKind::recovery) grad = recover_gradient(mesh, ctx.smoother->c);
  if (kind == IndicatorKind::norm) hess = recover_hessian(mesh, ctx.smoother->c);

  for (EdgeId e : targets) {
    try {
      double v = 0.0;
      switch (kind) {
        case IndicatorKind::regression: {
          bool empty = false;
          v = eta_regression(ctx, e, &empty);
          if (empty) field.no_data.push_back(e);
          break;
        }
        case IndicatorKind::auxiliary: v = eta_auxiliary(ctx, e); break;
        case IndicatorKind::residual: v = eta_residual(ctx, e); break;
        case IndicatorKind::recovery: v = eta_recovery(mesh, ctx.smoother->c, grad, e); break;
        case IndicatorKind::norm: v = eta_norm(mesh, hess, e); break;
      }
      if (!std::isfinite(v) || v < 0) throw IndicatorError("non-finite indicator value");
      field.set(e, v);
    } catch (const Error&) {
      field.failed.push_back(e);
    }
  }
  return field;
}

}  // namespace tpsfem
