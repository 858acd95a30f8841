#include "tpsfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tpsfem/error.hpp"

namespace tpsfem {

void RefinementDelta::merge(const RefinementDelta& other) {
  new_nodes.insert(new_nodes.end(), other.new_nodes.begin(), other.new_nodes.end());
  new_edges.insert(new_edges.end(), other.new_edges.begin(), other.new_edges.end());
  removed_edges.insert(removed_edges.end(), other.removed_edges.begin(), other.removed_edges.end());
  new_triangles.insert(new_triangles.end(), other.new_triangles.begin(), other.new_triangles.end());
  removed_triangles.insert(removed_triangles.end(), other.removed_triangles.begin(),
                           other.removed_triangles.end());
  max_depth = std::max(max_depth, other.max_depth);
}

std::uint64_t TriMesh::key(NodeId a, NodeId b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

NodeId TriMesh::add_node(const Point& p, std::pair<NodeId, NodeId> parents) {
  nodes_.push_back(p);
  parents_.push_back(parents);
  node_tris_.emplace_back();
  return static_cast<NodeId>(nodes_.size() - 1);
}

EdgeId TriMesh::add_edge(NodeId a, NodeId b, bool boundary, BoundaryKind kind) {
  Edge e;
  e.nodes = {a, b};
  e.on_boundary = boundary;
  e.boundary_kind = kind;
  edges_.push_back(e);
  const auto id = static_cast<EdgeId>(edges_.size() - 1);
  edge_lookup_.emplace(key(a, b), id);
  return id;
}

EdgeId TriMesh::edge_between(NodeId a, NodeId b, bool boundary, BoundaryKind kind) {
  if (auto it = edge_lookup_.find(key(a, b)); it != edge_lookup_.end()) return it->second;
  return add_edge(a, b, boundary, kind);
}

std::optional<EdgeId> TriMesh::find_edge(NodeId a, NodeId b) const {
  if (auto it = edge_lookup_.find(key(a, b)); it != edge_lookup_.end()) return it->second;
  return std::nullopt;
}

void TriMesh::attach(EdgeId e, TriId t) {
  Edge& edge = edges_[e];
  if (edge.tris[0] == kNone) {
    edge.tris[0] = t;
  } else if (edge.tris[1] == kNone) {
    edge.tris[1] = t;
  } else {
    throw AssemblyError("non-manifold edge " + std::to_string(e) + ": more than two triangles");
  }
}

void TriMesh::detach(EdgeId e, TriId t) {
  Edge& edge = edges_[e];
  if (edge.tris[0] == t) {
    edge.tris[0] = edge.tris[1];
    edge.tris[1] = kNone;
  } else if (edge.tris[1] == t) {
    edge.tris[1] = kNone;
  }
}

TriId TriMesh::add_triangle(const std::array<NodeId, 3>& nodes, int level, TriId parent) {
  Triangle tri;
  tri.nodes = nodes;
  tri.level = level;
  tri.parent = parent;
  const auto id = static_cast<TriId>(tris_.size());
  for (int i = 0; i < 3; ++i) {
    tri.edges[i] = edge_between(nodes[(i + 1) % 3], nodes[(i + 2) % 3], false, BoundaryKind::dirichlet);
  }
  tris_.push_back(tri);
  for (int i = 0; i < 3; ++i) {
    attach(tri.edges[i], id);
    node_tris_[nodes[i]].push_back(id);
  }
  ++active_count_;
  return id;
}

void TriMesh::retire_triangle(TriId t) {
  Triangle& tri = tris_[t];
  tri.active = false;
  for (int i = 0; i < 3; ++i) {
    detach(tri.edges[i], t);
    auto& incident = node_tris_[tri.nodes[i]];
    incident.erase(std::remove(incident.begin(), incident.end(), t), incident.end());
  }
  --active_count_;
}

TriMesh TriMesh::from_elements(std::vector<Point> nodes, const std::vector<ElementSpec>& elements,
                               BoundaryKind boundary_kind) {
  TriMesh mesh;
  for (const Point& p : nodes) mesh.add_node(p, {kNone, kNone});
  for (const ElementSpec& el : elements) {
    for (NodeId v : el.nodes) {
      if (v < 0 || v >= mesh.node_count()) throw ContractViolation("element references unknown node");
    }
    mesh.add_triangle(el.nodes, el.level, kNone);
  }
  for (Edge& e : mesh.edges_) {
    if (e.triangle_count() == 1) {
      e.on_boundary = true;
      e.boundary_kind = boundary_kind;
    }
  }
  return mesh;
}

std::vector<EdgeId> TriMesh::active_edges() const {
  std::vector<EdgeId> out;
  out.reserve(edges_.size());
  for (EdgeId e = 0; e < edge_capacity(); ++e) {
    if (edges_[e].alive) out.push_back(e);
  }
  return out;
}

std::vector<TriId> TriMesh::active_triangles() const {
  std::vector<TriId> out;
  out.reserve(active_count_);
  for (TriId t = 0; t < triangle_capacity(); ++t) {
    if (tris_[t].active) out.push_back(t);
  }
  return out;
}

EdgeKind TriMesh::edge_kind(EdgeId id) const {
  const Edge& e = edges_[id];
  int incident = 0;
  int bases = 0;
  for (TriId t : e.tris) {
    if (t == kNone) continue;
    ++incident;
    if (tris_[t].edges[0] == id) ++bases;
  }
  if (incident > 0 && bases == incident) return EdgeKind::base;
  if (bases > 0) return EdgeKind::interface_base;
  return e.on_boundary ? EdgeKind::boundary : EdgeKind::plain;
}

std::vector<bool> TriMesh::boundary_node_mask() const {
  std::vector<bool> mask(nodes_.size(), false);
  for (const Edge& e : edges_) {
    if (e.alive && e.on_boundary) mask[e.nodes[0]] = mask[e.nodes[1]] = true;
  }
  return mask;
}

std::vector<bool> TriMesh::boundary_node_mask(BoundaryKind kind) const {
  std::vector<bool> mask(nodes_.size(), false);
  for (const Edge& e : edges_) {
    if (e.alive && e.on_boundary && e.boundary_kind == kind) mask[e.nodes[0]] = mask[e.nodes[1]] = true;
  }
  return mask;
}

RefinementDelta TriMesh::split_edge(EdgeId e) {
  const Edge old = edges_[e];
  const NodeId a = old.nodes[0];
  const NodeId b = old.nodes[1];
  RefinementDelta delta;

  const NodeId mid = add_node(0.5 * (nodes_[a] + nodes_[b]), {a, b});
  delta.new_nodes.push_back(mid);

  edges_[e].alive = false;
  edge_lookup_.erase(key(a, b));
  const EdgeId half_a = add_edge(a, mid, old.on_boundary, old.boundary_kind);
  const EdgeId half_b = add_edge(mid, b, old.on_boundary, old.boundary_kind);
  edges_[e].children = {half_a, half_b};
  delta.new_edges.push_back(half_a);
  delta.new_edges.push_back(half_b);
  delta.removed_edges.push_back(e);

  for (TriId t : old.tris) {
    if (t == kNone) continue;
    const Triangle parent = tris_[t];
    int i = 0;
    while (parent.edges[i] != e) ++i;
    const NodeId apex = parent.nodes[i];
    const NodeId p = parent.nodes[(i + 1) % 3];
    const NodeId q = parent.nodes[(i + 2) % 3];

    delta.new_edges.push_back(add_edge(mid, apex, false, BoundaryKind::dirichlet));
    retire_triangle(t);
    const TriId first = add_triangle({mid, apex, p}, parent.level + 1, t);
    const TriId second = add_triangle({mid, q, apex}, parent.level + 1, t);
    tris_[t].children = {first, second};
    delta.removed_triangles.push_back(t);
    delta.new_triangles.push_back(first);
    delta.new_triangles.push_back(second);
  }
  return delta;
}

RefinementDelta TriMesh::refine_recursive(TriId t, int depth) {
  RefinementDelta delta;
  delta.max_depth = depth;
  for (;;) {
    if (!tris_[t].active) return delta;
    const EdgeId base = tris_[t].edges[0];
    const TriId nb = edges_[base].other(t);
    if (nb == kNone || tris_[nb].edges[0] == base) break;
    if (depth > active_count_) {
      throw ContractViolation("newest-node recursion exceeded the triangle count");
    }
    delta.merge(refine_recursive(nb, depth + 1));
  }
  delta.merge(split_edge(tris_[t].edges[0]));
  return delta;
}

RefinementDelta TriMesh::refine_triangle(TriId t) {
  if (t < 0 || t >= triangle_capacity() || !tris_[t].active) {
    throw ContractViolation("refine_triangle: triangle " + std::to_string(t) + " is not active");
  }
  return refine_recursive(t, 0);
}

RefinementDelta TriMesh::bisect_edge(EdgeId e) {
  if (e < 0 || e >= edge_capacity() || !edges_[e].alive) {
    throw ContractViolation("bisect_edge: edge " + std::to_string(e) + " is not alive");
  }
  if (!is_refinable(e)) {
    throw ContractViolation("bisect_edge: edge " + std::to_string(e) + " is not a base or interface base-edge");
  }
  const Edge& edge = edges_[e];
  TriId owner = kNone;
  for (TriId t : edge.tris) {
    if (t != kNone && tris_[t].edges[0] == e) owner = t;
  }
  return refine_recursive(owner, 0);
}

RefinementDelta TriMesh::split_edge_unchecked(EdgeId e) {
  if (e < 0 || e >= edge_capacity() || !edges_[e].alive) {
    throw ContractViolation("split_edge_unchecked: edge " + std::to_string(e) + " is not alive");
  }
  return split_edge(e);
}

TriMesh build_initial_grid(const DomainSpec& spec, int n_per_side, BoundaryKind boundary_kind) {
  spec.validate();
  if (n_per_side < 2) throw ConfigError("build_initial_grid: n_per_side must be at least 2");
  if (spec.shape == DomainShape::lshape && (n_per_side - 1) % 2 != 0) {
    throw ConfigError("build_initial_grid: an L-shaped grid needs an even number of cells per side");
  }
  const int cells = n_per_side - 1;
  const double dx = spec.box.width() / cells;
  const double dy = spec.box.height() / cells;
  auto xs = [&](int i) { return i == cells ? spec.box.x_hi : spec.box.x_lo + i * dx; };
  auto ys = [&](int j) { return j == cells ? spec.box.y_hi : spec.box.y_lo + j * dy; };
  auto removed = [&](int i, int j) { return spec.cell_removed(xs(i), xs(i + 1), ys(j), ys(j + 1)); };

  std::vector<bool> used(static_cast<std::size_t>(n_per_side * n_per_side), false);
  for (int j = 0; j < cells; ++j) {
    for (int i = 0; i < cells; ++i) {
      if (removed(i, j)) continue;
      for (int dj = 0; dj < 2; ++dj)
        for (int di = 0; di < 2; ++di) used[(j + dj) * n_per_side + i + di] = true;
    }
  }
  std::vector<NodeId> index(used.size(), kNone);
  std::vector<Point> points;
  for (int j = 0; j < n_per_side; ++j) {
    for (int i = 0; i < n_per_side; ++i) {
      if (!used[j * n_per_side + i]) continue;
      index[j * n_per_side + i] = static_cast<NodeId>(points.size());
      points.emplace_back(xs(i), ys(j));
    }
  }
  std::vector<ElementSpec> elements;
  for (int j = 0; j < cells; ++j) {
    for (int i = 0; i < cells; ++i) {
      if (removed(i, j)) continue;
      const NodeId ll = index[j * n_per_side + i];
      const NodeId lr = index[j * n_per_side + i + 1];
      const NodeId ul = index[(j + 1) * n_per_side + i];
      const NodeId ur = index[(j + 1) * n_per_side + i + 1];
      elements.push_back({{lr, ur, ll}, 0});
      elements.push_back({{ul, ll, ur}, 0});
    }
  }
  return TriMesh::from_elements(std::move(points), elements, boundary_kind);
}

RefinementDelta uniform_refine(TriMesh& mesh) {
  RefinementDelta delta;
  for (TriId t : mesh.active_triangles()) {
    if (mesh.triangle(t).active) delta.merge(mesh.refine_triangle(t));
  }
  return delta;
}

double triangle_area(const TriMesh& mesh, TriId t) {
  const auto& v = mesh.triangle(t).nodes;
  const Point e1 = mesh.node(v[1]) - mesh.node(v[0]);
  const Point e2 = mesh.node(v[2]) - mesh.node(v[0]);
  return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

double triangle_diameter(const TriMesh& mesh, TriId t) {
  const auto& v = mesh.triangle(t).nodes;
  double h = 0.0;
  for (int i = 0; i < 3; ++i) h = std::max(h, (mesh.node(v[i]) - mesh.node(v[(i + 1) % 3])).norm());
  return h;
}

double mesh_size(const TriMesh& mesh) {
  double h = 0.0;
  for (TriId t : mesh.active_triangles()) h = std::max(h, triangle_diameter(mesh, t));
  return h;
}

double min_angle(const TriMesh& mesh) {
  double smallest = std::numbers::pi;
  for (TriId t : mesh.active_triangles()) {
    const auto& v = mesh.triangle(t).nodes;
    for (int i = 0; i < 3; ++i) {
      const Point a = mesh.node(v[(i + 1) % 3]) - mesh.node(v[i]);
      const Point b = mesh.node(v[(i + 2) % 3]) - mesh.node(v[i]);
      const double cosine = std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0);
      smallest = std::min(smallest, std::acos(cosine));
    }
  }
  return smallest;
}

double total_area(const TriMesh& mesh) {
  double area = 0.0;
  for (TriId t : mesh.active_triangles()) area += triangle_area(mesh, t);
  return area;
}

}  // namespace tpsfem
