#include "tpsfem/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "tpsfem/element.hpp"
#include "tpsfem/error.hpp"

namespace tpsfem {

namespace {

P1Element<double> element_of(const TriMesh& mesh, TriId t) {
  const auto& v = mesh.triangle(t).nodes;
  P1Element<double> el(mesh.node(v[0]), mesh.node(v[1]), mesh.node(v[2]));
  const double scale = (mesh.node(v[1]) - mesh.node(v[0])).squaredNorm();
  if (!(el.area > 1e-14 * scale)) {
    throw AssemblyError("degenerate triangle " + std::to_string(t) + " (area " + std::to_string(el.area) + ")");
  }
  return el;
}

SparseMatrix from_triplets(int rows, int cols, const std::vector<Triplet>& triplets) {
  SparseMatrix out(rows, cols);
  out.setFromTriplets(triplets.begin(), triplets.end());
  out.makeCompressed();
  return out;
}

}  // namespace

FemBlocks assemble_fem(const TriMesh& mesh) {
  const int m = mesh.node_count();
  std::vector<Triplet> tl, t1, t2;
  const auto active = mesh.active_triangles();
  tl.reserve(9 * active.size());
  t1.reserve(9 * active.size());
  t2.reserve(9 * active.size());
  for (TriId t : active) {
    const auto el = element_of(mesh, t);
    const auto& v = mesh.triangle(t).nodes;
    const Eigen::Matrix3d local = el.area * el.grads.transpose() * el.grads;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        tl.emplace_back(v[a], v[b], local(a, b));
        t1.emplace_back(v[a], v[b], el.area / 3.0 * el.grads(0, b));
        t2.emplace_back(v[a], v[b], el.area / 3.0 * el.grads(1, b));
      }
    }
  }
  return {from_triplets(m, m, tl), from_triplets(m, m, t1), from_triplets(m, m, t2)};
}

DataBlocks assemble_data(int m, const BasisSamples& samples, const Vector& y, double scale) {
  const int n = samples.size();
  if (n == 0 && !(scale > 0)) throw EmptyDataError("no data points to assemble");
  const double inv_n = scale > 0 ? scale : 1.0 / n;
  std::vector<Triplet> ta;
  ta.reserve(9 * static_cast<std::size_t>(n));
  Vector d = Vector::Zero(m);
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < 3; ++a) {
      const double wa = samples.weights(i, a);
      d[samples.nodes(i, a)] += inv_n * wa * y[i];
      for (int b = 0; b < 3; ++b) {
        ta.emplace_back(samples.nodes(i, a), samples.nodes(i, b), inv_n * wa * samples.weights(i, b));
      }
    }
  }
  return {from_triplets(m, m, ta), std::move(d)};
}

DataBlocks assemble_data(const TriMesh& mesh, const ScatteredData& data, const DataBuckets& buckets) {
  return assemble_data(mesh.node_count(), basis_samples(mesh, data, buckets), data.y);
}

SparseMatrix assemble_mass(const TriMesh& mesh) {
  std::vector<Triplet> tm;
  for (TriId t : mesh.active_triangles()) {
    const auto el = element_of(mesh, t);
    const auto& v = mesh.triangle(t).nodes;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) tm.emplace_back(v[a], v[b], el.area / 12.0 * (a == b ? 2.0 : 1.0));
  }
  return from_triplets(mesh.node_count(), mesh.node_count(), tm);
}

BoundaryValues BoundaryValues::constant(double s, double u1, double u2, double w) {
  return {[s](const Point&) { return s; }, [u1](const Point&) { return u1; }, [u2](const Point&) { return u2; },
          [w](const Point&) { return w; }};
}

int TpsfemSystem::free_count() const {
  return static_cast<int>(std::count(fixed.begin(), fixed.end(), false));
}

bool TpsfemSystem::has_prescribed_values() const { return fixed_values.size() > 0 && fixed_values.any(); }

namespace {

template <typename F>
void for_each_saddle_entry(const TpsfemSystem& s, double alpha, F&& emit) {
  const int m = s.m;
  auto block = [&](const SparseMatrix& M, int br, int bc, double scale, bool transpose) {
    for (int k = 0; k < M.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(M, k); it; ++it) {
        const int r = transpose ? static_cast<int>(it.col()) : static_cast<int>(it.row());
        const int c = transpose ? static_cast<int>(it.row()) : static_cast<int>(it.col());
        emit(br * m + r, bc * m + c, scale * it.value());
      }
    }
  };
  block(s.A, 0, 0, 1.0, false);
  block(s.L, 0, 3, 1.0, false);
  block(s.L, 1, 1, alpha, false);
  block(s.G1, 1, 3, -1.0, false);
  block(s.L, 2, 2, alpha, false);
  block(s.G2, 2, 3, -1.0, false);
  block(s.L, 3, 0, 1.0, false);
  block(s.G1, 3, 1, -1.0, true);
  block(s.G2, 3, 2, -1.0, true);
}

}  // namespace

SparseMatrix TpsfemSystem::saddle(double alpha) const {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(A.nonZeros() + 6 * L.nonZeros()));
  for_each_saddle_entry(*this, alpha, [&](int r, int c, double v) { t.emplace_back(r, c, v); });
  return from_triplets(4 * m, 4 * m, t);
}

Vector TpsfemSystem::load_vector(double alpha) const {
  Vector h = Vector::Zero(4 * m);
  if (!has_prescribed_values()) return h;
  for_each_saddle_entry(*this, alpha, [&](int r, int c, double v) {
    if (fixed[c]) h[r] += v * fixed_values[c];
  });
  return h;
}

Vector TpsfemSystem::load_block(double alpha, int k) const {
  if (k < 1 || k > 4) throw ContractViolation("load block index must be 1..4");
  return load_vector(alpha).segment((k - 1) * m, m);
}

TpsfemSystem assemble_system(const TriMesh& mesh, const BasisSamples& samples, const Vector& y,
                             double data_scale) {
  TpsfemSystem s;
  s.m = mesh.node_count();
  s.n = samples.size();
  auto fem = assemble_fem(mesh);
  s.L = std::move(fem.L);
  s.G1 = std::move(fem.G1);
  s.G2 = std::move(fem.G2);
  auto data = assemble_data(s.m, samples, y, data_scale);
  s.A = std::move(data.A);
  s.d = std::move(data.d);
  s.basis_integrals = Vector::Zero(s.m);
  for (TriId t : mesh.active_triangles()) {
    const double third = triangle_area(mesh, t) / 3.0;
    for (NodeId v : mesh.triangle(t).nodes) s.basis_integrals[v] += third;
  }
  s.fixed.assign(4 * static_cast<std::size_t>(s.m), false);
  s.fixed_values = Vector::Zero(4 * s.m);
  return s;
}

TpsfemSystem assemble_system(const TriMesh& mesh, const ScatteredData& data, const DataBuckets& buckets) {
  return assemble_system(mesh, basis_samples(mesh, data, buckets), data.y);
}

namespace {

void prescribe(TpsfemSystem& s, NodeId p, const std::array<double, 4>& v) {
  for (int f = 0; f < 4; ++f) {
    const int i = f * s.m + p;
    s.fixed[i] = true;
    s.fixed_values[i] = v[f];
  }
}

}  // namespace

void apply_dirichlet(TpsfemSystem& system, const TriMesh& mesh, const BoundaryValues& values) {
  const auto mask = mesh.boundary_node_mask(BoundaryKind::dirichlet);
  for (NodeId p = 0; p < mesh.node_count(); ++p) {
    if (!mask[p]) continue;
    const Point& x = mesh.node(p);
    prescribe(system, p,
              {values.s ? values.s(x) : 0.0, values.u1 ? values.u1(x) : 0.0, values.u2 ? values.u2(x) : 0.0,
               values.w ? values.w(x) : 0.0});
  }
}

void apply_dirichlet(TpsfemSystem& system, const TriMesh& mesh, const std::map<NodeId, std::array<double, 4>>& values) {
  const auto mask = mesh.boundary_node_mask();
  for (const auto& [p, v] : values) {
    if (p < 0 || p >= mesh.node_count() || !mask[p]) {
      throw ContractViolation("apply_dirichlet: node " + std::to_string(p) + " is not a boundary node");
    }
    prescribe(system, p, v);
  }
}

void pin_multiplier_constant(TpsfemSystem& system, NodeId node) {
  if (node < 0 || node >= system.m) throw ContractViolation("pin node out of range");
  const int i = system.index(Field::w, node);
  system.fixed[i] = true;
  system.fixed_values[i] = 0.0;
  system.multiplier_pin = node;
}

void apply_boundary(TpsfemSystem& system, const TriMesh& mesh, const BoundaryValues& values) {
  apply_dirichlet(system, mesh, values);
  if (std::none_of(system.fixed.begin(), system.fixed.end(), [](bool b) { return b; })) {
    pin_multiplier_constant(system, 0);
  }
}

void write_coo(const std::string& path, const SparseMatrix& matrix) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << std::setprecision(17);
  for (int k = 0; k < matrix.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(matrix, k); it; ++it) out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace tpsfem
