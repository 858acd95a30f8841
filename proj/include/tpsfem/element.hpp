#pragma once

#include <array>

#include <Eigen/Core>

namespace tpsfem {

/// Geometry of a linear (P1) triangle: signed area and the constant
/// gradients of its three barycentric basis functions.
template <typename Scalar>
struct P1Element {
  using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

  Scalar area{};
  /// Column i is grad(b_i).
  Eigen::Matrix<Scalar, 2, 3> grads;

  P1Element(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
    const Scalar twice = (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y());
    area = twice / Scalar(2);
    const std::array<const Vec2*, 3> v{&p0, &p1, &p2};
    for (int i = 0; i < 3; ++i) {
      const Vec2& a = *v[(i + 1) % 3];
      const Vec2& b = *v[(i + 2) % 3];
      grads(0, i) = (a.y() - b.y()) / twice;
      grads(1, i) = (b.x() - a.x()) / twice;
    }
  }
};

/// Barycentric coordinates of p in triangle (p0, p1, p2).
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> barycentric(const Eigen::Matrix<Scalar, 2, 1>& p0,
                                        const Eigen::Matrix<Scalar, 2, 1>& p1,
                                        const Eigen::Matrix<Scalar, 2, 1>& p2,
                                        const Eigen::Matrix<Scalar, 2, 1>& p) {
  const Scalar det = (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y());
  const Scalar l1 = ((p.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p.y() - p0.y())) / det;
  const Scalar l2 = ((p1.x() - p0.x()) * (p.y() - p0.y()) - (p.x() - p0.x()) * (p1.y() - p0.y())) / det;
  return {Scalar(1) - l1 - l2, l1, l2};
}

}  // namespace tpsfem
