#pragma once

#include <string>

#include "tpsfem/types.hpp"

namespace tpsfem {

struct Box {
  double x_lo = 0.0;
  double x_hi = 1.0;
  double y_lo = 0.0;
  double y_hi = 1.0;

  double width() const { return x_hi - x_lo; }
  double height() const { return y_hi - y_lo; }
  Point center() const { return {0.5 * (x_lo + x_hi), 0.5 * (y_lo + y_hi)}; }
  bool contains(const Point& p, double tol = 0.0) const {
    return p.x() >= x_lo - tol && p.x() <= x_hi + tol && p.y() >= y_lo - tol && p.y() <= y_hi + tol;
  }
};

enum class DomainShape { square, lshape };

/// Quadrant removed from the bounding box of an L-shaped domain.
enum class Corner { upper_right, upper_left, lower_left, lower_right };

/// Square or L-shaped FEM domain. The L-shape is the bounding box minus the
/// quadrant beyond the box center in the direction of `cut_corner`; points on
/// the re-entrant edges belong to the domain.
struct DomainSpec {
  DomainShape shape = DomainShape::square;
  Box box{};
  Corner cut_corner = Corner::upper_right;

  static DomainSpec square(const Box& box) { return {DomainShape::square, box, Corner::upper_right}; }
  static DomainSpec lshape(const Box& box, Corner corner = Corner::upper_right) {
    return {DomainShape::lshape, box, corner};
  }

  /// Throws ConfigError on an empty box.
  void validate() const;
  bool contains(const Point& p, double tol = 1e-12) const;
  /// True if the open cell [x0,x1]x[y0,y1] lies in the removed quadrant.
  bool cell_removed(double x0, double x1, double y0, double y1) const;
  double area() const;
  double diameter() const;
};

std::string to_string(DomainShape shape);
DomainShape parse_domain_shape(const std::string& s);

}  // namespace tpsfem
