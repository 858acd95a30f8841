#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "tpsfem/data.hpp"
#include "tpsfem/domain.hpp"

namespace tpsfem {

enum class KernelKind { tps, wendland_c0, wendland_c2, buhmann };

std::string to_string(KernelKind kind);
KernelKind parse_kernel(const std::string& s);
inline bool compactly_supported(KernelKind k) { return k != KernelKind::tps; }

/// Kernel profile Phi(r). Compactly supported kernels take the scaled
/// distance r / rho and vanish for r >= 1; the thin-plate kernel takes the
/// raw distance. Removable singularities at r = 0 return their limits.
template <typename Scalar>
Scalar kernel_value(KernelKind kind, Scalar r) {
  using std::log;
  switch (kind) {
    case KernelKind::tps:
      return r > Scalar(0) ? r * r * log(r) : Scalar(0);
    case KernelKind::wendland_c0: {
      const Scalar t = Scalar(1) - r;
      return r < Scalar(1) ? t * t : Scalar(0);
    }
    case KernelKind::wendland_c2: {
      const Scalar t = Scalar(1) - r;
      return r < Scalar(1) ? t * t * t * t * (Scalar(4) * r + Scalar(1)) : Scalar(0);
    }
    case KernelKind::buhmann:
      if (!(r < Scalar(1))) return Scalar(0);
      if (r <= Scalar(0)) return Scalar(1) / Scalar(3);
      return Scalar(1) / Scalar(3) + r * r - Scalar(4) * r * r * r / Scalar(3) + Scalar(2) * r * r * log(r);
  }
  return Scalar(0);
}

struct ControlPointSet {
  std::vector<Point> points;
  /// Index of each control point in the source data.
  std::vector<int> data_index;
  double spacing = 0.0;

  int size() const { return static_cast<int>(points.size()); }
};

/// Nearest data point to each node of a rectangular grid of spacing h over
/// the region; nodes farther than h/3 from every data point are skipped and
/// repeated picks are dropped.
ControlPointSet select_control_points(const ScatteredData& data, const Box& region, double h);

/// Radius at which the median, over `centers`, of the number of `counted`
/// points within the radius reaches `target` (bisection).
double radius_for_coverage(const std::vector<Point>& counted, const std::vector<Point>& centers, int target);

struct KernelStats {
  long nnz = 0;
  double ratio = 0.0;
};

/// Nonzeros of the control-point kernel matrix Phi(|x_i - x_j| / rho).
KernelStats kernel_matrix_stats(const ControlPointSet& cp, KernelKind kind, double radius);

struct RbfFit {
  KernelKind kernel = KernelKind::tps;
  double radius = 0.0;
  ControlPointSet centers;
  Vector weights;
  /// Affine tail (constant, x, y); thin-plate kernel only.
  Eigen::Vector3d affine = Eigen::Vector3d::Zero();
  KernelStats stats;
  double time_s = 0.0;
  double rmse = 0.0;
  /// True when the normal equations needed a ridge term.
  bool regularized = false;

  double evaluate(const Point& x) const;
};

/// Least-squares fit of sum_i w_i Phi_i(x) (plus an affine tail for the
/// thin-plate kernel) to all data through the normal equations.
RbfFit fit_rbf(const ScatteredData& data, const ControlPointSet& centers, KernelKind kind, double radius = 0.0);

}  // namespace tpsfem
