#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "tpsfem/types.hpp"

namespace tpsfem {

/// Uniform bucket grid over a static point set, for nearest-neighbour and
/// fixed-radius queries.
class PointGrid {
 public:
  PointGrid() = default;
  /// `per_cell` is the average bucket occupancy the cell size is chosen for.
  explicit PointGrid(const std::vector<Point>& points, double per_cell = 4.0);

  bool empty() const { return points_ == nullptr || points_->empty(); }

  /// Index of the closest point and its distance. Ties go to the lower index.
  std::pair<int, double> nearest(const Point& p) const;

  /// Number of points with |q - p| <= r.
  int count_within(const Point& p, double r) const;

  /// Calls f(index, distance) for every point with |q - p| <= r.
  template <typename F>
  void for_each_within(const Point& p, double r, F&& f) const {
    if (empty()) return;
    const auto [i0, j0] = cell_of(Point(p.x() - r, p.y() - r));
    const auto [i1, j1] = cell_of(Point(p.x() + r, p.y() + r));
    const double r2 = r * r;
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) {
        const int c = j * nx_ + i;
        for (int k = start_[c]; k < start_[c + 1]; ++k) {
          const int idx = order_[k];
          const double d2 = ((*points_)[idx] - p).squaredNorm();
          if (d2 <= r2) f(idx, std::sqrt(d2));
        }
      }
    }
  }

 private:
  std::pair<int, int> cell_of(const Point& p) const;

  const std::vector<Point>* points_ = nullptr;
  Point origin_ = Point::Zero();
  double cell_ = 1.0;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<int> start_;
  std::vector<int> order_;
};

}  // namespace tpsfem
