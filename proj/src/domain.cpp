#include "tpsfem/domain.hpp"

#include <cmath>

#include "tpsfem/error.hpp"

namespace tpsfem {

void DomainSpec::validate() const {
  if (!(box.x_lo < box.x_hi) || !(box.y_lo < box.y_hi)) {
    throw ConfigError("domain bounding box must satisfy x_lo < x_hi and y_lo < y_hi");
  }
}

bool DomainSpec::cell_removed(double x0, double x1, double y0, double y1) const {
  if (shape != DomainShape::lshape) return false;
  const Point c = box.center();
  switch (cut_corner) {
    case Corner::upper_right: return x0 >= c.x() && y0 >= c.y();
    case Corner::upper_left: return x1 <= c.x() && y0 >= c.y();
    case Corner::lower_left: return x1 <= c.x() && y1 <= c.y();
    case Corner::lower_right: return x0 >= c.x() && y1 <= c.y();
  }
  return false;
}

bool DomainSpec::contains(const Point& p, double tol) const {
  if (!box.contains(p, tol)) return false;
  if (shape != DomainShape::lshape) return true;
  const Point c = box.center();
  const double dx = p.x() - c.x();
  const double dy = p.y() - c.y();
  switch (cut_corner) {
    case Corner::upper_right: return !(dx > tol && dy > tol);
    case Corner::upper_left: return !(dx < -tol && dy > tol);
    case Corner::lower_left: return !(dx < -tol && dy < -tol);
    case Corner::lower_right: return !(dx > tol && dy < -tol);
  }
  return true;
}

double DomainSpec::area() const {
  const double full = box.width() * box.height();
  return shape == DomainShape::lshape ? 0.75 * full : full;
}

double DomainSpec::diameter() const { return std::hypot(box.width(), box.height()); }

std::string to_string(DomainShape shape) { return shape == DomainShape::square ? "square" : "lshape"; }

DomainShape parse_domain_shape(const std::string& s) {
  if (s == "square") return DomainShape::square;
  if (s == "lshape") return DomainShape::lshape;
  throw ConfigError("unknown domain shape '" + s + "' (expected square|lshape)");
}

}  // namespace tpsfem
