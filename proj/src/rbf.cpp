#include "tpsfem/rbf.hpp"

#include <algorithm>
#include <chrono>
#include <unordered_set>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "tpsfem/error.hpp"
#include "tpsfem/spatial_index.hpp"

namespace tpsfem {

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::tps: return "tps";
    case KernelKind::wendland_c0: return "wendland_c0";
    case KernelKind::wendland_c2: return "wendland_c2";
    case KernelKind::buhmann: return "buhmann";
  }
  return "unknown";
}

KernelKind parse_kernel(const std::string& s) {
  for (KernelKind k : {KernelKind::tps, KernelKind::wendland_c0, KernelKind::wendland_c2, KernelKind::buhmann})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown kernel '" + s + "'");
}

ControlPointSet select_control_points(const ScatteredData& data, const Box& region, double h) {
  if (!(h > 0)) throw ConfigError("control grid spacing must be positive");
  if (data.size() == 0) throw SelectionError("no data to select control points from");
  const PointGrid grid(data.points);
  const int nx = static_cast<int>(std::floor(region.width() / h + 1e-9));
  const int ny = static_cast<int>(std::floor(region.height() / h + 1e-9));
  ControlPointSet out;
  out.spacing = h;
  std::unordered_set<int> taken;
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const Point node(region.x_lo + i * h, region.y_lo + j * h);
      const auto [idx, dist] = grid.nearest(node);
      if (idx < 0 || dist > h / 3.0) continue;
      if (!taken.insert(idx).second) continue;
      out.points.push_back(data.points[idx]);
      out.data_index.push_back(idx);
    }
  }
  if (out.points.empty()) throw SelectionError("no grid node has a data point within h/3");
  return out;
}

double radius_for_coverage(const std::vector<Point>& counted, const std::vector<Point>& centers, int target) {
  if (centers.empty() || counted.empty()) throw ConfigError("coverage radius needs points and centers");
  if (target < 1 || target > static_cast<int>(counted.size())) {
    throw ConfigError("coverage target must lie in [1, number of counted points]");
  }
  const PointGrid grid(counted);
  auto median_count = [&](double r) {
    std::vector<int> counts;
    counts.reserve(centers.size());
    for (const Point& c : centers) counts.push_back(grid.count_within(c, r));
    auto mid = counts.begin() + static_cast<long>(counts.size() / 2);
    std::nth_element(counts.begin(), mid, counts.end());
    return *mid;
  };
  const Box b = bounding_box(counted);
  double lo = 0.0;
  double hi = std::hypot(b.width(), b.height()) + 1e-12;
  for (const Point& c : centers) {
    hi = std::max(hi, std::hypot(std::max(std::abs(c.x() - b.x_lo), std::abs(c.x() - b.x_hi)),
                                 std::max(std::abs(c.y() - b.y_lo), std::abs(c.y() - b.y_hi))));
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (median_count(mid) >= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

KernelStats kernel_matrix_stats(const ControlPointSet& cp, KernelKind kind, double radius) {
  KernelStats s;
  const double n = cp.size();
  if (!compactly_supported(kind)) {
    s.nnz = static_cast<long>(cp.size()) * cp.size();
    s.ratio = 1.0;
    return s;
  }
  const PointGrid grid(cp.points);
  for (const Point& p : cp.points) {
    grid.for_each_within(p, radius, [&](int, double d) {
      if (kernel_value(kind, d / radius) != 0.0) ++s.nnz;
    });
  }
  s.ratio = static_cast<double>(s.nnz) / (n * n);
  return s;
}

double RbfFit::evaluate(const Point& x) const {
  double v = 0.0;
  for (int i = 0; i < centers.size(); ++i) {
    const double d = (x - centers.points[i]).norm();
    v += weights[i] * kernel_value(kernel, compactly_supported(kernel) ? d / radius : d);
  }
  if (kernel == KernelKind::tps) v += affine[0] + affine[1] * x.x() + affine[2] * x.y();
  return v;
}

namespace {

using Clock = std::chrono::steady_clock;

void fit_dense_tps(const ScatteredData& data, RbfFit& fit) {
  const int nc = fit.centers.size();
  const int cols = nc + 3;
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(cols, cols);
  Vector rhs = Vector::Zero(cols);
  constexpr int kBlock = 512;
  Eigen::MatrixXd rows(kBlock, cols);
  for (int start = 0; start < data.size(); start += kBlock) {
    const int count = std::min(kBlock, data.size() - start);
    for (int k = 0; k < count; ++k) {
      const Point& x = data.points[start + k];
      for (int i = 0; i < nc; ++i) rows(k, i) = kernel_value(KernelKind::tps, (x - fit.centers.points[i]).norm());
      rows(k, nc) = 1.0;
      rows(k, nc + 1) = x.x();
      rows(k, nc + 2) = x.y();
    }
    const auto block = rows.topRows(count);
    normal.selfadjointView<Eigen::Lower>().rankUpdate(block.transpose());
    rhs.noalias() += block.transpose() * data.y.segment(start, count);
  }
  normal = normal.selfadjointView<Eigen::Lower>();
  Eigen::LLT<Eigen::MatrixXd> llt(normal);
  Vector theta;
  if (llt.info() == Eigen::Success) theta = llt.solve(rhs);
  if (llt.info() != Eigen::Success || !theta.allFinite()) {
    const double ridge = 1e-12 * normal.diagonal().cwiseAbs().maxCoeff();
    normal.diagonal().array() += ridge;
    theta = normal.ldlt().solve(rhs);
    fit.regularized = true;
  }
  fit.weights = theta.head(nc);
  fit.affine = theta.tail<3>();
}

void fit_sparse(const ScatteredData& data, RbfFit& fit) {
  const int nc = fit.centers.size();
  const PointGrid grid(fit.centers.points);
  std::vector<Triplet> trip;
  for (int j = 0; j < data.size(); ++j) {
    grid.for_each_within(data.points[j], fit.radius, [&](int i, double d) {
      const double v = kernel_value(fit.kernel, d / fit.radius);
      if (v != 0.0) trip.emplace_back(j, i, v);
    });
  }
  SparseMatrix B(data.size(), nc);
  B.setFromTriplets(trip.begin(), trip.end());
  trip.clear();
  trip.shrink_to_fit();
  SparseMatrix normal = (B.transpose() * B).pruned();
  const Vector rhs = B.transpose() * data.y;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(normal);
  Vector w;
  if (ldlt.info() == Eigen::Success) w = ldlt.solve(rhs);
  if (ldlt.info() != Eigen::Success || !w.allFinite()) {
    double dmax = 0.0;
    for (int k = 0; k < nc; ++k) dmax = std::max(dmax, std::abs(normal.coeff(k, k)));
    SparseMatrix ridge(nc, nc);
    ridge.setIdentity();
    normal += (1e-12 * std::max(dmax, 1e-300)) * ridge;
    ldlt.compute(normal);
    w = ldlt.solve(rhs);
    fit.regularized = true;
    if (ldlt.info() != Eigen::Success || !w.allFinite()) throw SolverError("CSRBF normal equations are singular");
  }
  fit.weights = w;
}

}  // namespace

RbfFit fit_rbf(const ScatteredData& data, const ControlPointSet& centers, KernelKind kind, double radius) {
  if (centers.size() == 0) throw SelectionError("no control points");
  if (compactly_supported(kind) && !(radius > 0)) throw ConfigError("compactly supported kernels need a radius");
  RbfFit fit;
  fit.kernel = kind;
  fit.radius = compactly_supported(kind) ? radius : 0.0;
  fit.centers = centers;
  fit.stats = kernel_matrix_stats(centers, kind, radius);

  const auto start = Clock::now();
  if (kind == KernelKind::tps) {
    fit_dense_tps(data, fit);
  } else {
    fit_sparse(data, fit);
  }
  fit.time_s = std::chrono::duration<double>(Clock::now() - start).count();

  double sum = 0.0;
  for (int j = 0; j < data.size(); ++j) {
    const double r = fit.evaluate(data.points[j]) - data.y[j];
    sum += r * r;
  }
  fit.rmse = std::sqrt(sum / data.size());
  return fit;
}

}  // namespace tpsfem
