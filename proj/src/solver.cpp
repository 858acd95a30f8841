#include "tpsfem/solver.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/OrderingMethods>
#include <sstream>

#include "tpsfem/element.hpp"
#include "tpsfem/error.hpp"

namespace tpsfem {

Vector Smoother::stacked() const {
  Vector x(4 * m());
  x << c, g1, g2, w;
  return x;
}

SaddleFactorization::SaddleFactorization(const TpsfemSystem& system, double alpha)
    : system_(&system), alpha_(alpha) {
  if (!(alpha > 0) || !std::isfinite(alpha)) throw ConfigError("smoothing parameter must be positive and finite");
  const int m = system.m;
  const int full = 4 * m;

  // Number free unknowns node by node (fields of a node adjacent) in an AMD
  // order of the node graph; this keeps LU fill close to that of a scalar
  // problem on the mesh.
  const SparseMatrix graph = system.L + system.A;
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> perm;
  Eigen::AMDOrdering<int>()(graph, perm);
  free_of_full_.assign(full, -1);
  for (int k = 0; k < m; ++k) {
    const int p = perm.indices()[k];
    for (int f = 0; f < 4; ++f) {
      const int i = f * m + p;
      if (system.fixed[i]) continue;
      free_of_full_[i] = static_cast<int>(full_of_free_.size());
      full_of_free_.push_back(i);
    }
  }

  const SparseMatrix S = system.saddle(alpha);
  h_ = system.load_vector(alpha);
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(S.nonZeros()));
  for (int k = 0; k < S.outerSize(); ++k) {
    const int cf = free_of_full_[k];
    if (cf < 0) continue;
    for (SparseMatrix::InnerIterator it(S, k); it; ++it) {
      const int rf = free_of_full_[it.row()];
      if (rf >= 0) t.emplace_back(rf, cf, it.value());
    }
  }
  const int nf = static_cast<int>(full_of_free_.size());
  K_.resize(nf, nf);
  K_.setFromTriplets(t.begin(), t.end());
  K_.makeCompressed();

  // Symmetric equilibration: the data, smoothing and constraint blocks differ
  // in magnitude by many orders, which otherwise forces off-diagonal pivots.
  Vector row_max = Vector::Zero(nf);
  for (int k = 0; k < K_.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(K_, k); it; ++it)
      row_max[it.row()] = std::max(row_max[it.row()], std::abs(it.value()));
  scale_ = Vector(nf);
  for (int i = 0; i < nf; ++i) scale_[i] = row_max[i] > 0 ? 1.0 / std::sqrt(row_max[i]) : 1.0;
  const SparseMatrix scaled = scale_.asDiagonal() * K_ * scale_.asDiagonal();

  lu_.compute(scaled);
  if (lu_.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "factorisation failed for alpha=" << alpha << ", m=" << system.m << ": " << lu_.lastErrorMessage();
    throw SolverError(msg.str());
  }

  // SparseLU happily factorises numerically singular matrices (tiny pivots),
  // so probe with a generic right-hand side and require a small residual
  // after the same refinement steps a real solve gets. Ill-conditioning at
  // tiny alpha on fine meshes leaves up to about 1e-3 here; a true null space
  // leaves residuals far above one.
  Vector probe(nf);
  for (int i = 0; i < nf; ++i) probe[i] = 1.0 + static_cast<double>((i * 7919) % 97) / 97.0;
  Vector x = scale_.cwiseProduct(lu_.solve(scale_.cwiseProduct(probe)));
  for (int step = 0; step < 3 && x.allFinite(); ++step) {
    x += scale_.cwiseProduct(lu_.solve(scale_.cwiseProduct(Vector(probe - K_ * x))));
  }
  const double rel = (probe - K_ * x).norm() / probe.norm();
  if (!x.allFinite() || !(rel < 0.1)) {
    std::ostringstream msg;
    msg << "saddle system is singular for alpha=" << alpha << ", m=" << system.m << " (probe residual " << rel
        << ")";
    throw SolverError(msg.str());
  }
}

Vector SaddleFactorization::solve_reduced(const Vector& b) const {
  auto apply_inverse = [&](const Vector& r) -> Vector {
    return scale_.cwiseProduct(lu_.solve(scale_.cwiseProduct(r)));
  };
  Vector x = apply_inverse(b);
  const double bnorm = b.norm();
  for (int step = 0; step < 3; ++step) {
    const Vector r = b - K_ * x;
    if (!(r.norm() > 1e-15 * bnorm)) break;
    x += apply_inverse(r);
  }
  if (!x.allFinite()) {
    std::ostringstream msg;
    msg << "solve produced non-finite values for alpha=" << alpha_ << ", m=" << system_->m;
    throw SolverError(msg.str());
  }
  return x;
}

Vector SaddleFactorization::solve(const Vector& d, bool homogeneous) const {
  const int nf = unknowns();
  Vector b(nf);
  for (int f = 0; f < nf; ++f) {
    const int i = full_of_free_[f];
    b[f] = (i < system_->m ? d[i] : 0.0) - (homogeneous ? 0.0 : h_[i]);
  }
  const Vector xf = solve_reduced(b);
  Vector x = homogeneous ? Vector::Zero(4 * system_->m) : Vector(system_->fixed_values);
  for (int f = 0; f < nf; ++f) x[full_of_free_[f]] = xf[f];
  return x;
}

Eigen::MatrixXd SaddleFactorization::solve_c_many(const Eigen::MatrixXd& d) const {
  Eigen::MatrixXd out(system_->m, d.cols());
  for (Eigen::Index j = 0; j < d.cols(); ++j) out.col(j) = solve(d.col(j), true).head(system_->m);
  return out;
}

Vector solve_dense(const TpsfemSystem& system, double alpha) {
  const int full = 4 * system.m;
  std::vector<int> free;
  for (int i = 0; i < full; ++i)
    if (!system.fixed[i]) free.push_back(i);
  const Eigen::MatrixXd S = Eigen::MatrixXd(system.saddle(alpha));
  const Vector h = system.load_vector(alpha);
  const int nf = static_cast<int>(free.size());
  Eigen::MatrixXd K(nf, nf);
  Vector b(nf);
  for (int r = 0; r < nf; ++r) {
    b[r] = (free[r] < system.m ? system.d[free[r]] : 0.0) - h[free[r]];
    for (int c = 0; c < nf; ++c) K(r, c) = S(free[r], free[c]);
  }
  Vector x = system.fixed_values;
  if (nf == 0) return x;
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
  if (!lu.isInvertible()) {
    std::ostringstream msg;
    msg << "dense saddle system is singular for alpha=" << alpha << ", m=" << system.m;
    throw SolverError(msg.str());
  }
  const Vector xf = lu.solve(b);
  for (int r = 0; r < nf; ++r) x[free[r]] = xf[r];
  return x;
}

Smoother to_smoother(const TpsfemSystem& system, const TriMesh& mesh, const Vector& x, double alpha) {
  const int m = system.m;
  Smoother s;
  s.mesh = &mesh;
  s.alpha = alpha;
  s.c = x.segment(0, m);
  s.g1 = x.segment(m, m);
  s.g2 = x.segment(2 * m, m);
  s.w = x.segment(3 * m, m);
  return s;
}

Smoother solve(const TpsfemSystem& system, const TriMesh& mesh, double alpha) {
  const SaddleFactorization f(system, alpha);
  return to_smoother(system, mesh, f.solve(system.d), alpha);
}

Point element_gradient(const TriMesh& mesh, const Vector& c, TriId t) {
  const auto& v = mesh.triangle(t).nodes;
  const P1Element<double> el(mesh.node(v[0]), mesh.node(v[1]), mesh.node(v[2]));
  return el.grads * Eigen::Vector3d(c[v[0]], c[v[1]], c[v[2]]);
}

namespace {

TriId locate_or_throw(const TriMesh& mesh, const Point& x) {
  Locator loc(mesh);
  const TriId t = loc.locate(x);
  if (t == kNone) {
    std::ostringstream msg;
    msg << "point (" << x.x() << ", " << x.y() << ") lies outside the mesh";
    throw DomainError(msg.str());
  }
  return t;
}

}  // namespace

double evaluate(const Smoother& s, const Point& x) {
  const TriId t = locate_or_throw(*s.mesh, x);
  const auto& v = s.mesh->triangle(t).nodes;
  const Eigen::Vector3d l = barycentric<double>(s.mesh->node(v[0]), s.mesh->node(v[1]), s.mesh->node(v[2]), x);
  return l[0] * s.c[v[0]] + l[1] * s.c[v[1]] + l[2] * s.c[v[2]];
}

Point evaluate_grad(const Smoother& s, const Point& x) {
  return element_gradient(*s.mesh, s.c, locate_or_throw(*s.mesh, x));
}

std::pair<double, double> constraint_residual(const TpsfemSystem& system, const Smoother& s) {
  const Vector lc = system.L * s.c;
  const Vector r = lc - system.G1.transpose() * s.g1 - system.G2.transpose() * s.g2;
  double rr = 0.0;
  double ll = 0.0;
  for (int p = 0; p < system.m; ++p) {
    if (system.fixed[system.index(Field::w, p)]) continue;
    rr += r[p] * r[p];
    ll += lc[p] * lc[p];
  }
  return {std::sqrt(rr), std::sqrt(ll)};
}

double system_residual(const TpsfemSystem& system, const Smoother& s) {
  const Vector x = s.stacked();
  const Vector sx = system.saddle(s.alpha) * x;
  double rr = 0.0;
  double bb = 0.0;
  for (int i = 0; i < 4 * system.m; ++i) {
    if (system.fixed[i]) continue;
    const double b = i < system.m ? system.d[i] : 0.0;
    rr += (sx[i] - b) * (sx[i] - b);
    bb += b * b;
  }
  return bb > 0 ? std::sqrt(rr / bb) : std::sqrt(rr);
}

double rmse(const Vector& fitted, const Vector& y) {
  if (y.size() == 0) throw EmptyDataError("metrics need at least one data point");
  return std::sqrt((fitted - y).squaredNorm() / static_cast<double>(y.size()));
}

double rmspe(const Vector& fitted, const Vector& y) {
  if (y.size() == 0) throw EmptyDataError("metrics need at least one data point");
  const double ymax = y.maxCoeff();
  if (ymax == 0.0) throw MetricError("RMSPE is undefined when max(y) = 0");
  return rmse(fitted, y) / ymax;
}

double max_err(const Vector& fitted, const Vector& y) {
  if (y.size() == 0) throw EmptyDataError("metrics need at least one data point");
  return (fitted - y).cwiseAbs().maxCoeff();
}

FitMetrics fit_metrics(const Vector& fitted, const Vector& y) {
  FitMetrics m;
  m.rmse = rmse(fitted, y);
  m.rmspe = y.maxCoeff() != 0.0 ? rmspe(fitted, y) : std::nan("");
  m.max = max_err(fitted, y);
  return m;
}

double smoothing_energy(const TpsfemSystem& system, const Smoother& s) {
  return s.g1.dot(system.L * s.g1) + s.g2.dot(system.L * s.g2);
}

}  // namespace tpsfem
