#pragma once

#include <array>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tpsfem/domain.hpp"
#include "tpsfem/types.hpp"

namespace tpsfem {

enum class EdgeKind { base, interface_base, plain, boundary };
enum class BoundaryKind { dirichlet, neumann };

struct Edge {
  std::array<NodeId, 2> nodes{kNone, kNone};
  /// Active incident triangles; tris[1] == kNone on the boundary.
  std::array<TriId, 2> tris{kNone, kNone};
  bool alive = true;
  bool on_boundary = false;
  BoundaryKind boundary_kind = BoundaryKind::dirichlet;
  std::array<EdgeId, 2> children{kNone, kNone};

  int triangle_count() const { return (tris[0] != kNone) + (tris[1] != kNone); }
  TriId other(TriId t) const { return tris[0] == t ? tris[1] : tris[0]; }
};

/// A triangle record. `nodes` is counter-clockwise with nodes[0] the newest
/// node; edges[i] is the edge opposite nodes[i], so edges[0] is the base-edge.
struct Triangle {
  std::array<NodeId, 3> nodes{kNone, kNone, kNone};
  std::array<EdgeId, 3> edges{kNone, kNone, kNone};
  int level = 0;
  TriId parent = kNone;
  std::array<TriId, 2> children{kNone, kNone};
  bool active = true;

  NodeId newest_node() const { return nodes[0]; }
  EdgeId base_edge() const { return edges[0]; }
};

/// Ids created and retired by a refinement operation.
struct RefinementDelta {
  std::vector<NodeId> new_nodes;
  std::vector<EdgeId> new_edges;
  std::vector<EdgeId> removed_edges;
  std::vector<TriId> new_triangles;
  std::vector<TriId> removed_triangles;
  int max_depth = 0;

  void merge(const RefinementDelta& other);
  bool empty() const { return new_nodes.empty(); }
};

/// Element input for TriMesh::from_elements: counter-clockwise vertices with
/// the newest node first.
struct ElementSpec {
  std::array<NodeId, 3> nodes;
  int level = 0;
};

/// Conforming triangular mesh refined by newest-node bisection.
///
/// Node, edge and triangle ids are stable: refinement appends records and
/// retires bisected edges/triangles without erasing them. Node ids double as
/// basis-function indices, so coefficient vectors only ever grow.
class TriMesh {
 public:
  TriMesh() = default;

  /// Builds a mesh from explicit elements. Edges with a single incident
  /// element are marked as boundary with `boundary_kind`.
  static TriMesh from_elements(std::vector<Point> nodes, const std::vector<ElementSpec>& elements,
                               BoundaryKind boundary_kind = BoundaryKind::dirichlet);

  int node_count() const { return static_cast<int>(nodes_.size()); }
  const Point& node(NodeId id) const { return nodes_[id]; }
  const std::vector<Point>& nodes() const { return nodes_; }
  /// Endpoints of the edge a midpoint node was inserted on; {kNone, kNone} for initial nodes.
  std::pair<NodeId, NodeId> node_parents(NodeId id) const { return parents_[id]; }

  int edge_capacity() const { return static_cast<int>(edges_.size()); }
  const Edge& edge(EdgeId id) const { return edges_[id]; }
  std::vector<EdgeId> active_edges() const;
  std::optional<EdgeId> find_edge(NodeId a, NodeId b) const;
  EdgeKind edge_kind(EdgeId id) const;
  bool is_refinable(EdgeId id) const {
    const EdgeKind k = edge_kind(id);
    return k == EdgeKind::base || k == EdgeKind::interface_base;
  }

  int triangle_capacity() const { return static_cast<int>(tris_.size()); }
  int active_triangle_count() const { return active_count_; }
  const Triangle& triangle(TriId id) const { return tris_[id]; }
  std::vector<TriId> active_triangles() const;
  /// Active triangles incident to a node.
  const std::vector<TriId>& node_triangles(NodeId id) const { return node_tris_[id]; }
  /// Neighbour across local edge `i` of triangle `t`, or kNone.
  TriId neighbour(TriId t, int i) const { return edges_[tris_[t].edges[i]].other(t); }

  std::vector<bool> boundary_node_mask() const;
  std::vector<bool> boundary_node_mask(BoundaryKind kind) const;

  /// Bisects a base or interface base-edge. An interface base-edge first has
  /// its coarser neighbour refined recursively until the edge is a base-edge
  /// of every incident triangle. Throws ContractViolation for other edges.
  RefinementDelta bisect_edge(EdgeId e);

  /// Bisects `t` along its base-edge, refining the neighbour across it
  /// first when the two base-edges disagree.
  RefinementDelta refine_triangle(TriId t);

  /// Splits every triangle incident to `e` along `e`, ignoring newest-node
  /// rules. Used for temporary local grids only.
  RefinementDelta split_edge_unchecked(EdgeId e);

 private:
  static std::uint64_t key(NodeId a, NodeId b);
  NodeId add_node(const Point& p, std::pair<NodeId, NodeId> parents);
  EdgeId add_edge(NodeId a, NodeId b, bool boundary, BoundaryKind kind);
  EdgeId edge_between(NodeId a, NodeId b, bool boundary, BoundaryKind kind);
  TriId add_triangle(const std::array<NodeId, 3>& nodes, int level, TriId parent);
  void retire_triangle(TriId t);
  void attach(EdgeId e, TriId t);
  void detach(EdgeId e, TriId t);
  RefinementDelta refine_recursive(TriId t, int depth);
  /// Splits all triangles incident to `e` along `e`; each triangle's apex is
  /// the vertex opposite `e`.
  RefinementDelta split_edge(EdgeId e);

  std::vector<Point> nodes_;
  std::vector<std::pair<NodeId, NodeId>> parents_;
  std::vector<std::vector<TriId>> node_tris_;
  std::vector<Edge> edges_;
  std::vector<Triangle> tris_;
  std::unordered_map<std::uint64_t, EdgeId> edge_lookup_;
  int active_count_ = 0;
};

/// Uniform grid of n_per_side x n_per_side nodes over the domain's bounding
/// box (the L-shape keeps the cells outside the removed quadrant). Each cell
/// is split lower-left to upper-right; the right-angle vertex is the newest
/// node so the shared diagonal is the base-edge of both halves.
TriMesh build_initial_grid(const DomainSpec& spec, int n_per_side,
                           BoundaryKind boundary_kind = BoundaryKind::dirichlet);

/// Bisects every currently active triangle once along its base-edge.
RefinementDelta uniform_refine(TriMesh& mesh);

/// Longest edge over all active triangles.
double mesh_size(const TriMesh& mesh);
double triangle_area(const TriMesh& mesh, TriId t);
/// Longest edge of one triangle.
double triangle_diameter(const TriMesh& mesh, TriId t);
/// Smallest interior angle (radians) over all active triangles.
double min_angle(const TriMesh& mesh);
double total_area(const TriMesh& mesh);

}  // namespace tpsfem
