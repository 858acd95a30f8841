#pragma once

#include <memory>
#include <vector>

#include <Eigen/SparseLU>

#include "tpsfem/assembly.hpp"
#include "tpsfem/data.hpp"
#include "tpsfem/mesh.hpp"

namespace tpsfem {

/// Fitted TPSFEM surface: nodal values of s (c), of the gradient fields
/// (g1, g2) and of the multiplier (w).
struct Smoother {
  const TriMesh* mesh = nullptr;
  Vector c;
  Vector g1;
  Vector g2;
  Vector w;
  double alpha = 0.0;

  int m() const { return static_cast<int>(c.size()); }
  Vector stacked() const;
};

/// LU factorisation of the saddle system for one smoothing parameter, with
/// prescribed unknowns eliminated.
class SaddleFactorization {
 public:
  SaddleFactorization(const TpsfemSystem& system, double alpha);

  double alpha() const { return alpha_; }
  int unknowns() const { return static_cast<int>(K_.rows()); }
  long nonzeros() const { return static_cast<long>(K_.nonZeros()); }
  const SparseMatrix& reduced_matrix() const { return K_; }

  /// Full-length (4m) solution for data right-hand side `d`. With
  /// `homogeneous`, prescribed unknowns are set to zero and contribute no
  /// load.
  Vector solve(const Vector& d, bool homogeneous = false) const;
  /// Homogeneous solves for several data right-hand sides (one per column);
  /// returns the c block of each solution.
  Eigen::MatrixXd solve_c_many(const Eigen::MatrixXd& d) const;

 private:
  Vector solve_reduced(const Vector& b) const;

  const TpsfemSystem* system_;
  double alpha_;
  std::vector<int> free_of_full_;
  std::vector<int> full_of_free_;
  SparseMatrix K_;
  Vector scale_;
  Vector h_;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
};

/// Dense LU solve of the reduced system, for small local problems. Returns
/// the full 4m vector.
Vector solve_dense(const TpsfemSystem& system, double alpha);

Smoother to_smoother(const TpsfemSystem& system, const TriMesh& mesh, const Vector& x, double alpha);

/// Factorises and solves the system.
Smoother solve(const TpsfemSystem& system, const TriMesh& mesh, double alpha);

/// Value of s at x. Throws DomainError outside the mesh.
double evaluate(const Smoother& s, const Point& x);
/// Constant gradient of s on the element containing x.
Point evaluate_grad(const Smoother& s, const Point& x);
/// Gradient of the c field on one triangle.
Point element_gradient(const TriMesh& mesh, const Vector& c, TriId t);

/// |L c - G1' g1 - G2' g2| over the rows whose multiplier is free, and |L c|
/// over the same rows.
std::pair<double, double> constraint_residual(const TpsfemSystem& system, const Smoother& s);
/// Relative residual |S x - b| / |b| over free rows.
double system_residual(const TpsfemSystem& system, const Smoother& s);

struct FitMetrics {
  double rmse = 0.0;
  double rmspe = 0.0;
  double max = 0.0;
};

double rmse(const Vector& fitted, const Vector& y);
/// RMSE divided by max(y). Throws MetricError when max(y) is zero.
double rmspe(const Vector& fitted, const Vector& y);
double max_err(const Vector& fitted, const Vector& y);
FitMetrics fit_metrics(const Vector& fitted, const Vector& y);

/// Smoothing energy sum_k g_k^T L g_k.
double smoothing_energy(const TpsfemSystem& system, const Smoother& s);

}  // namespace tpsfem
