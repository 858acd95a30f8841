#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tpsfem/domain.hpp"
#include "tpsfem/mesh.hpp"
#include "tpsfem/types.hpp"

namespace tpsfem {

struct ScatteredData {
  std::vector<Point> points;
  Vector y;

  int size() const { return static_cast<int>(points.size()); }
  /// Copy restricted to the given indices, in order.
  ScatteredData subset(const std::vector<int>& indices) const;
};

/// Uniform scale plus translation: forward(p) = scale * (p - from) + to.
struct AffineMap {
  double scale = 1.0;
  Point from = Point::Zero();
  Point to = Point::Zero();

  Point forward(const Point& p) const { return scale * (p - from) + to; }
  Point inverse(const Point& q) const { return (q - to) / scale + from; }
  static AffineMap identity() { return {}; }
  /// Aspect-preserving map of `source` centred into `target`.
  static AffineMap fit(const Box& source, const Box& target);
};

struct LoadedData {
  ScatteredData data;
  AffineMap map;
};

/// Reads whitespace-separated "x y z" records ('#' comments, blank lines
/// skipped; extra columns ignored). With a target box the point cloud is
/// mapped into it; responses are not scaled.
LoadedData load_xyz(const std::string& path, const std::optional<Box>& target = std::nullopt);
void write_xyz(const std::string& path, const ScatteredData& data);

Box bounding_box(const std::vector<Point>& points);

template <typename Scalar>
Scalar peaks(Scalar x, Scalar y) {
  using std::exp;
  return Scalar(3) * (1 - x) * (1 - x) * exp(-x * x - (y + 1) * (y + 1)) -
         Scalar(10) * (x / 5 - x * x * x - y * y * y * y * y) * exp(-x * x - y * y) -
         exp(-(x + 1) * (x + 1) - y * y) / Scalar(3);
}

template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> peaks_gradient(Scalar x, Scalar y) {
  using std::exp;
  const Scalar e1 = exp(-x * x - (y + 1) * (y + 1));
  const Scalar e2 = exp(-x * x - y * y);
  const Scalar e3 = exp(-(x + 1) * (x + 1) - y * y);
  const Scalar poly = x / 5 - x * x * x - y * y * y * y * y;
  const Scalar dx = Scalar(3) * e1 * (-2 * (1 - x) - 2 * x * (1 - x) * (1 - x)) -
                    Scalar(10) * e2 * ((Scalar(1) / 5 - 3 * x * x) - 2 * x * poly) +
                    Scalar(2) * (x + 1) * e3 / Scalar(3);
  const Scalar dy = Scalar(3) * (1 - x) * (1 - x) * e1 * (-2 * (y + 1)) -
                    Scalar(10) * e2 * (-5 * y * y * y * y - 2 * y * poly) + Scalar(2) * y * e3 / Scalar(3);
  return {dx, dy};
}

struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

/// n points uniform in `region` (rejected against `accept` when given), with
/// responses f(x) plus N(0, sigma^2) noise. One seeded generator drives both.
ScatteredData sample_function(int n, const Box& region, const std::function<double(const Point&)>& f,
                              const NoiseSpec& noise,
                              const std::function<bool(const Point&)>& accept = nullptr);

ScatteredData gen_peaks(int n, const Box& region, const NoiseSpec& noise);

/// Assignment of data points to active triangles.
struct DataBuckets {
  /// Owning triangle per point; kNone for points outside the mesh.
  std::vector<TriId> owner;
  /// Point indices per triangle id (empty for retired triangles), ascending.
  std::vector<std::vector<int>> members;
  std::vector<int> outside;

  int count(TriId t) const { return t < static_cast<TriId>(members.size()) ? static_cast<int>(members[t].size()) : 0; }
  int located() const { return static_cast<int>(owner.size() - outside.size()); }
};

/// Walking point locator over the active triangles of a mesh.
class Locator {
 public:
  explicit Locator(const TriMesh& mesh, double tol = 1e-12) : mesh_(&mesh), tol_(tol) {}
  /// Containing active triangle (smallest id among ties), or kNone.
  TriId locate(const Point& p);

 private:
  TriId walk(const Point& p, TriId start) const;
  TriId scan(const Point& p) const;
  TriId smallest_containing(const Point& p, TriId t) const;

  const TriMesh* mesh_;
  double tol_;
  TriId last_ = kNone;
};

bool triangle_contains(const TriMesh& mesh, TriId t, const Point& p, double tol = 1e-12);

DataBuckets locate(const TriMesh& mesh, const ScatteredData& data);

/// Moves points of triangles retired by `delta` into their active
/// descendants.
void rebucket(const TriMesh& mesh, const ScatteredData& data, const RefinementDelta& delta,
              DataBuckets& buckets);

/// Largest distance from a probe-grid point inside the domain to its
/// nearest data point.
double max_data_gap(const ScatteredData& data, const DomainSpec& domain, double resolution);

/// Per-sample basis support: the three nodes of the owning triangle and the
/// barycentric weights of the sample in it.
struct BasisSamples {
  Eigen::Matrix<NodeId, Eigen::Dynamic, 3, Eigen::RowMajor> nodes;
  Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> weights;

  int size() const { return static_cast<int>(nodes.rows()); }
  /// Values of the piecewise-linear field with nodal coefficients `c`.
  Vector evaluate(const Vector& c) const;
  /// (1/n) sum_i b(x_i) z_i.
  Vector project(const Vector& z, int m) const;
};

/// Requires every point to be located (no outside points).
BasisSamples basis_samples(const TriMesh& mesh, const ScatteredData& data, const DataBuckets& buckets);

}  // namespace tpsfem
