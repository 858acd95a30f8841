#include "tpsfem/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tpsfem {

PointGrid::PointGrid(const std::vector<Point>& points, double per_cell) : points_(&points) {
  if (points.empty()) return;
  Point lo = points.front();
  Point hi = points.front();
  for (const Point& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Point extent = (hi - lo).cwiseMax(Point::Constant(1e-12));
  const double area = extent.x() * extent.y();
  cell_ = std::sqrt(area * per_cell / static_cast<double>(points.size()));
  cell_ = std::max({cell_, extent.x() / 4096.0, extent.y() / 4096.0});
  origin_ = lo;
  nx_ = std::max(1, static_cast<int>(std::floor(extent.x() / cell_)) + 1);
  ny_ = std::max(1, static_cast<int>(std::floor(extent.y() / cell_)) + 1);

  std::vector<int> cell_index(points.size());
  start_.assign(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto [i, j] = cell_of(points[k]);
    cell_index[k] = j * nx_ + i;
    ++start_[cell_index[k] + 1];
  }
  for (std::size_t c = 1; c < start_.size(); ++c) start_[c] += start_[c - 1];
  order_.resize(points.size());
  std::vector<int> fill(start_.begin(), start_.end() - 1);
  for (std::size_t k = 0; k < points.size(); ++k) order_[fill[cell_index[k]]++] = static_cast<int>(k);
}

std::pair<int, int> PointGrid::cell_of(const Point& p) const {
  const int i = static_cast<int>(std::floor((p.x() - origin_.x()) / cell_));
  const int j = static_cast<int>(std::floor((p.y() - origin_.y()) / cell_));
  return {std::clamp(i, 0, nx_ - 1), std::clamp(j, 0, ny_ - 1)};
}

std::pair<int, double> PointGrid::nearest(const Point& p) const {
  if (empty()) return {-1, std::numeric_limits<double>::infinity()};
  const auto [ci, cj] = cell_of(p);
  int best = -1;
  double best_d2 = std::numeric_limits<double>::infinity();
  const int max_ring = std::max(nx_, ny_);
  for (int ring = 0; ring <= max_ring; ++ring) {
    for (int j = cj - ring; j <= cj + ring; ++j) {
      if (j < 0 || j >= ny_) continue;
      for (int i = ci - ring; i <= ci + ring; ++i) {
        if (i < 0 || i >= nx_) continue;
        if (std::max(std::abs(i - ci), std::abs(j - cj)) != ring) continue;
        const int c = j * nx_ + i;
        for (int k = start_[c]; k < start_[c + 1]; ++k) {
          const int idx = order_[k];
          const double d2 = ((*points_)[idx] - p).squaredNorm();
          if (d2 < best_d2 || (d2 == best_d2 && idx < best)) {
            best_d2 = d2;
            best = idx;
          }
        }
      }
    }
    // Every point outside the scanned rings is at least `ring * cell_` away
    // from p, measured from p's clamped cell.
    if (best >= 0) {
      const Point cell_lo = origin_ + cell_ * Point(ci - ring, cj - ring);
      const Point cell_hi = origin_ + cell_ * Point(ci + ring + 1, cj + ring + 1);
      const double margin = std::min({p.x() - cell_lo.x(), cell_hi.x() - p.x(), p.y() - cell_lo.y(),
                                      cell_hi.y() - p.y()});
      if (margin > 0 && margin * margin > best_d2) break;
    }
  }
  return {best, std::sqrt(best_d2)};
}

int PointGrid::count_within(const Point& p, double r) const {
  int count = 0;
  for_each_within(p, r, [&](int, double) { ++count; });
  return count;
}

}  // namespace tpsfem
