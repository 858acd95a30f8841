#pragma once

// Independent reference computations shared by the unit and acceptance
// tests. Nothing here calls the library's element or assembly code.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tpsfem/data.hpp"
#include "tpsfem/indicators.hpp"
#include "tpsfem/mesh.hpp"

namespace tpsfem::testing {

/// Problems found by exhaustive checks of the conformity invariants; empty
/// when the mesh is conforming.
inline std::string conformity_report(const TriMesh& mesh, double domain_area) {
  std::ostringstream out;
  const std::vector<TriId> tris = mesh.active_triangles();
  std::map<std::pair<NodeId, NodeId>, int> edge_use;
  std::set<NodeId> used_nodes;
  double area_sum = 0.0;
  for (TriId t : tris) {
    const auto& v = mesh.triangle(t).nodes;
    const Point a = mesh.node(v[0]), b = mesh.node(v[1]), c = mesh.node(v[2]);
    const double area = 0.5 * ((b - a).x() * (c - a).y() - (c - a).x() * (b - a).y());
    if (!(area > 0)) out << "triangle " << t << " has non-positive area " << area << '\n';
    area_sum += area;
    for (int i = 0; i < 3; ++i) {
      NodeId p = v[(i + 1) % 3], q = v[(i + 2) % 3];
      if (p > q) std::swap(p, q);
      ++edge_use[{p, q}];
      used_nodes.insert(v[i]);
    }
  }
  // Boundary edges must lie on the hull of the union; an edge used once that
  // has a node strictly inside it is a hanging node.
  for (const auto& [edge, count] : edge_use) {
    if (count > 2) out << "edge " << edge.first << "-" << edge.second << " used " << count << " times\n";
    const Point a = mesh.node(edge.first), b = mesh.node(edge.second);
    for (NodeId n : used_nodes) {
      if (n == edge.first || n == edge.second) continue;
      const Point p = mesh.node(n);
      const double cross = (b - a).x() * (p - a).y() - (b - a).y() * (p - a).x();
      const double t = (p - a).dot(b - a) / (b - a).squaredNorm();
      if (std::abs(cross) < 1e-14 && t > 1e-12 && t < 1 - 1e-12) {
        out << "node " << n << " hangs on edge " << edge.first << "-" << edge.second << '\n';
      }
    }
  }
  // Interior edges are used twice; edges used once must carry the boundary flag.
  for (const auto& [edge, count] : edge_use) {
    const auto id = mesh.find_edge(edge.first, edge.second);
    if (!id) {
      out << "edge " << edge.first << "-" << edge.second << " missing from the edge table\n";
      continue;
    }
    const bool boundary = mesh.edge(*id).on_boundary;
    if (count == 1 && !boundary) out << "edge " << *id << " has one triangle but is not boundary\n";
    if (count == 2 && boundary) out << "edge " << *id << " has two triangles but is boundary\n";
  }
  if (std::abs(area_sum - domain_area) > 1e-12 * domain_area) {
    out << "area " << area_sum << " differs from domain area " << domain_area << '\n';
  }
  return out.str();
}

/// Coefficients (a0, a1, a2) of the plane a0 + a1 x + a2 y equal to 1 at
/// vertex i and 0 at the other two.
inline Eigen::Vector3d hat_plane(const std::array<Point, 3>& v, int i) {
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) m.row(r) << 1.0, v[r].x(), v[r].y();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  rhs[i] = 1.0;
  return m.fullPivLu().solve(rhs);
}

inline double plane_value(const Eigen::Vector3d& a, const Point& p) { return a[0] + a[1] * p.x() + a[2] * p.y(); }

/// Seven-point degree-5 triangle rule: barycentric points and weights
/// (weights sum to 1; multiply by the area).
struct QuadPoint {
  std::array<double, 3> bary;
  double weight;
};

inline std::vector<QuadPoint> triangle_rule7() {
  const double a1 = 0.059715871789770, b1 = 0.470142064105115;
  const double a2 = 0.797426985353087, b2 = 0.101286507323456;
  const double w0 = 0.225, w1 = 0.132394152788506, w2 = 0.125939180544827;
  return {{{1.0 / 3, 1.0 / 3, 1.0 / 3}, w0}, {{a1, b1, b1}, w1}, {{b1, a1, b1}, w1}, {{b1, b1, a1}, w1},
          {{a2, b2, b2}, w2}, {{b2, a2, b2}, w2}, {{b2, b2, a2}, w2}};
}

inline std::array<Point, 3> vertices(const TriMesh& mesh, TriId t) {
  const auto& v = mesh.triangle(t).nodes;
  return {mesh.node(v[0]), mesh.node(v[1]), mesh.node(v[2])};
}

inline double area_of(const std::array<Point, 3>& v) {
  return 0.5 * std::abs((v[1] - v[0]).x() * (v[2] - v[0]).y() - (v[2] - v[0]).x() * (v[1] - v[0]).y());
}

/// Smallest-id active triangle containing p by exhaustive scan, or kNone.
inline TriId brute_locate(const TriMesh& mesh, const Point& p, double tol = 1e-12) {
  TriId best = kNone;
  for (TriId t : mesh.active_triangles()) {
    const auto v = vertices(mesh, t);
    bool inside = true;
    for (int i = 0; i < 3 && inside; ++i) inside = plane_value(hat_plane(v, i), p) >= -tol;
    if (inside && (best == kNone || t < best)) best = t;
  }
  return best;
}

/// A mesh refined by `steps` bisections of uniformly chosen refinable edges.
inline TriMesh random_mesh(std::uint64_t seed, const DomainSpec& domain, int n_per_side, int steps,
                           int* max_depth = nullptr) {
  TriMesh mesh = build_initial_grid(domain, n_per_side);
  std::mt19937_64 rng(seed);
  for (int s = 0; s < steps; ++s) {
    const std::vector<EdgeId> edges = refinable_edges(mesh);
    std::uniform_int_distribution<std::size_t> pick(0, edges.size() - 1);
    const RefinementDelta d = mesh.bisect_edge(edges[pick(rng)]);
    if (max_depth) *max_depth = std::max(*max_depth, d.max_depth);
  }
  return mesh;
}

inline ScatteredData random_points(int n, const Box& box, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(box.x_lo, box.x_hi), uy(box.y_lo, box.y_hi), uz(-1.0, 1.0);
  ScatteredData d;
  d.y.resize(n);
  for (int i = 0; i < n; ++i) {
    d.points.emplace_back(ux(rng), uy(rng));
    d.y[i] = uz(rng);
  }
  return d;
}

struct DenseBlocks {
  Eigen::MatrixXd L, G1, G2, A;
  Eigen::VectorXd d;
};

/// Per-element integration with plane-fitted basis functions and a degree-5
/// rule, plus exhaustive point location for the data blocks.
inline DenseBlocks dense_oracle(const TriMesh& mesh, const ScatteredData& data) {
  const int m = mesh.node_count();
  DenseBlocks o{Eigen::MatrixXd::Zero(m, m), Eigen::MatrixXd::Zero(m, m), Eigen::MatrixXd::Zero(m, m),
                Eigen::MatrixXd::Zero(m, m), Eigen::VectorXd::Zero(m)};
  const auto rule = triangle_rule7();
  for (TriId t : mesh.active_triangles()) {
    const auto v = vertices(mesh, t);
    const auto& ids = mesh.triangle(t).nodes;
    const double area = area_of(v);
    std::array<Eigen::Vector3d, 3> plane;
    for (int i = 0; i < 3; ++i) plane[i] = hat_plane(v, i);
    for (int p = 0; p < 3; ++p) {
      for (int q = 0; q < 3; ++q) {
        double lpq = 0, g1 = 0, g2 = 0;
        for (const QuadPoint& qp : rule) {
          const Point x = qp.bary[0] * v[0] + qp.bary[1] * v[1] + qp.bary[2] * v[2];
          const double bp = plane_value(plane[p], x);
          lpq += qp.weight * area * (plane[p][1] * plane[q][1] + plane[p][2] * plane[q][2]);
          g1 += qp.weight * area * bp * plane[q][1];
          g2 += qp.weight * area * bp * plane[q][2];
        }
        o.L(ids[p], ids[q]) += lpq;
        o.G1(ids[p], ids[q]) += g1;
        o.G2(ids[p], ids[q]) += g2;
      }
    }
  }
  for (int i = 0; i < data.size(); ++i) {
    const TriId t = brute_locate(mesh, data.points[i]);
    if (t == kNone) throw std::runtime_error("oracle: data point outside the mesh");
    const auto v = vertices(mesh, t);
    const auto& ids = mesh.triangle(t).nodes;
    Eigen::Vector3d b;
    for (int k = 0; k < 3; ++k) b[k] = plane_value(hat_plane(v, k), data.points[i]);
    for (int p = 0; p < 3; ++p) {
      o.d[ids[p]] += b[p] * data.y[i] / data.size();
      for (int q = 0; q < 3; ++q) o.A(ids[p], ids[q]) += b[p] * b[q] / data.size();
    }
  }
  return o;
}

}  // namespace tpsfem::testing
