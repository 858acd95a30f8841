#pragma once

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "tpsfem/data.hpp"
#include "tpsfem/mesh.hpp"
#include "tpsfem/types.hpp"

namespace tpsfem {

/// Stiffness and gradient blocks: L_pq = int grad b_p . grad b_q and
/// (G_k)_pq = int b_p d_k b_q.
struct FemBlocks {
  SparseMatrix L;
  SparseMatrix G1;
  SparseMatrix G2;
};

FemBlocks assemble_fem(const TriMesh& mesh);

/// A = (1/n) sum b(x_i) b(x_i)^T and d = (1/n) sum b(x_i) y_i.
struct DataBlocks {
  SparseMatrix A;
  Vector d;
};

/// `scale` replaces the 1/n normalisation when positive; empty samples then
/// give zero blocks.
DataBlocks assemble_data(int m, const BasisSamples& samples, const Vector& y, double scale = 0.0);
DataBlocks assemble_data(const TriMesh& mesh, const ScatteredData& data, const DataBuckets& buckets);

/// Consistent P1 mass matrix.
SparseMatrix assemble_mass(const TriMesh& mesh);

/// Unknown blocks of the saddle system, in solve order.
enum class Field : int { c = 0, g1 = 1, g2 = 2, w = 3 };

/// Prescribed boundary functions for s, u1, u2 and the multiplier w.
struct BoundaryValues {
  std::function<double(const Point&)> s;
  std::function<double(const Point&)> u1;
  std::function<double(const Point&)> u2;
  std::function<double(const Point&)> w;

  static BoundaryValues constant(double s, double u1, double u2, double w = 0.0);
};

/// The assembled smoothing problem
///
///   [ A    0     0    L  ] [c ]   [d]
///   [ 0   aL     0  -G1  ] [g1] = [0]  - h
///   [ 0    0    aL  -G2  ] [g2]   [0]
///   [ L  -G1'  -G2'   0  ] [w ]   [0]
///
/// with (Gk)_pq = int b_p d_k b_q. The last row is the weak gradient relation
/// int grad(s).grad(b_j) = int u.grad(b_j), i.e. L c = G1' g1 + G2' g2,
/// together with the set of prescribed unknowns. Prescribed unknowns are
/// eliminated at solve time; their contribution to the remaining rows is the
/// load vector h, which depends on the smoothing parameter a through the aL
/// blocks.
struct TpsfemSystem {
  int m = 0;
  int n = 0;
  SparseMatrix A;
  SparseMatrix L;
  SparseMatrix G1;
  SparseMatrix G2;
  Vector d;
  /// int b_p over the mesh.
  Vector basis_integrals;
  /// Per unknown (block-major, length 4m): prescribed or free.
  std::vector<bool> fixed;
  /// Prescribed values; zero where free.
  Vector fixed_values;
  /// Node whose multiplier was pinned to remove the constant-w null space
  /// (kNone when Dirichlet rows already remove it).
  NodeId multiplier_pin = kNone;

  int index(Field f, NodeId p) const { return static_cast<int>(f) * m + p; }
  int free_count() const;
  bool has_prescribed_values() const;

  /// Full 4m x 4m saddle operator.
  SparseMatrix saddle(double alpha) const;
  /// h = S(alpha) x_fixed over all 4m rows.
  Vector load_vector(double alpha) const;
  /// Block k in 1..4 of the load vector.
  Vector load_block(double alpha, int k) const;
};

/// Assembles all blocks with every unknown free.
TpsfemSystem assemble_system(const TriMesh& mesh, const ScatteredData& data, const DataBuckets& buckets);
TpsfemSystem assemble_system(const TriMesh& mesh, const BasisSamples& samples, const Vector& y,
                             double data_scale = 0.0);

/// Prescribes s, u1, u2 and w at every node on a Dirichlet boundary edge.
void apply_dirichlet(TpsfemSystem& system, const TriMesh& mesh, const BoundaryValues& values);

/// Prescribes nodal values {s, u1, u2, w} at the listed nodes, which must lie
/// on the boundary.
void apply_dirichlet(TpsfemSystem& system, const TriMesh& mesh,
                     const std::map<NodeId, std::array<double, 4>>& values);

/// Pins w at one node. Without Dirichlet rows a constant w lies in the kernel
/// of both L and Gk (row sums of Gk vanish), and the constraint rows sum to
/// zero, so removing that row and column loses nothing.
void pin_multiplier_constant(TpsfemSystem& system, NodeId node = 0);

/// Applies Dirichlet values on Dirichlet-kind edges and pins the multiplier
/// constant when no node is prescribed.
void apply_boundary(TpsfemSystem& system, const TriMesh& mesh, const BoundaryValues& values);

/// Writes "row col value" lines (0-based) for debugging.
void write_coo(const std::string& path, const SparseMatrix& matrix);

}  // namespace tpsfem
