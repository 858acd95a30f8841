#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <vector>

#include "tpsfem/assembly.hpp"
#include "tpsfem/data.hpp"
#include "tpsfem/solver.hpp"

namespace tpsfem {

struct GcvConfig {
  double alpha_lo = 1e-10;
  double alpha_hi = 1e-4;
  int probes = 16;
  std::uint64_t seed = 0;
  double r1 = 0.1;
  double r2 = 0.3;
  int max_evals = 25;

  /// Throws ConfigError.
  void validate() const;
};

/// n x k matrix of independent +-1 entries drawn from a seeded generator.
Eigen::MatrixXd rademacher_probes(int n, int k, std::uint64_t seed);

struct TraceEstimate {
  double mean = 0.0;
  /// Standard error of the mean over probes (0 for a single probe).
  double std_error = 0.0;
};

/// Hutchinson estimate of tr(M) as the average of z^T M z over Rademacher
/// probes. `apply(z)` returns M z.
template <typename Apply>
TraceEstimate hutchinson_trace(int n, int probes, std::uint64_t seed, Apply&& apply) {
  std::mt19937_64 rng(seed);
  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(probes));
  Vector z(n);
  for (int k = 0; k < probes; ++k) {
    for (int i = 0; i < n; ++i) z[i] = (rng() & 1u) ? 1.0 : -1.0;
    samples.push_back(z.dot(apply(z)));
  }
  TraceEstimate est;
  for (double s : samples) est.mean += s;
  est.mean /= probes;
  if (probes > 1) {
    double var = 0.0;
    for (double s : samples) var += (s - est.mean) * (s - est.mean);
    est.std_error = std::sqrt(var / (probes - 1) / probes);
  }
  return est;
}

struct GcvEvaluation {
  double alpha = 0.0;
  double score = 0.0;
  double rss = 0.0;
  /// Estimate of tr(I - H).
  double trace = 0.0;
};

/// V(alpha) = n RSS / tr(I - H)^2 for the smoother on a fixed system. The
/// influence operator H maps responses to fitted values at the data sites;
/// H z is obtained from a homogeneous solve with z in place of the responses.
/// The same probe set is used for every alpha.
class GcvObjective {
 public:
  GcvObjective(const TpsfemSystem& system, const TriMesh& mesh, const BasisSamples& samples, const Vector& y,
               const GcvConfig& config);

  GcvEvaluation evaluate(double alpha);
  double operator()(double alpha) { return evaluate(alpha).score; }

  /// Solution for an alpha evaluated earlier (solved on demand otherwise).
  Smoother smoother(double alpha);
  const std::vector<GcvEvaluation>& history() const { return history_; }

 private:
  const TpsfemSystem* system_;
  const TriMesh* mesh_;
  const BasisSamples* samples_;
  const Vector* y_;
  Eigen::MatrixXd probes_;
  Eigen::MatrixXd probe_rhs_;
  std::map<double, Smoother> solutions_;
  std::vector<GcvEvaluation> history_;
};

struct AlphaSearch {
  double alpha = 0.0;
  double score = 0.0;
  /// (alpha, V) in evaluation order.
  std::vector<std::pair<double, double>> trace;
};

/// Bounded Brent minimisation of V over log10(alpha) within the bracket,
/// using at most config.max_evals evaluations.
AlphaSearch alpha_initial(const std::function<double(double)>& score, const GcvConfig& config);

/// Best of V(a), V(r2 a), V(r1 a); ties resolve to the largest candidate.
AlphaSearch alpha_update(double alpha_prev, const std::function<double(double)>& score, const GcvConfig& config);

}  // namespace tpsfem
