#include "tpsfem/gcv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>

#include "tpsfem/error.hpp"

namespace tpsfem {

void GcvConfig::validate() const {
  if (!(alpha_lo > 0) || !(alpha_lo < alpha_hi)) throw ConfigError("GCV bracket must satisfy 0 < alpha_lo < alpha_hi");
  if (probes < 1) throw ConfigError("GCV needs at least one probe vector");
  if (!(r1 > 0 && r1 < 1) || !(r2 > 0 && r2 < 1)) throw ConfigError("alpha update ratios must lie in (0, 1)");
  if (max_evals < 3) throw ConfigError("alpha search needs at least 3 evaluations");
}

Eigen::MatrixXd rademacher_probes(int n, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd z(n, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < n; ++i) z(i, j) = (rng() & 1u) ? 1.0 : -1.0;
  return z;
}

GcvObjective::GcvObjective(const TpsfemSystem& system, const TriMesh& mesh, const BasisSamples& samples,
                           const Vector& y, const GcvConfig& config)
    : system_(&system), mesh_(&mesh), samples_(&samples), y_(&y) {
  config.validate();
  probes_ = rademacher_probes(samples.size(), config.probes, config.seed);
  probe_rhs_.resize(system.m, config.probes);
  for (int j = 0; j < config.probes; ++j) probe_rhs_.col(j) = samples.project(probes_.col(j), system.m);
}

GcvEvaluation GcvObjective::evaluate(double alpha) {
  const SaddleFactorization f(*system_, alpha);
  Smoother s = to_smoother(*system_, *mesh_, f.solve(system_->d), alpha);
  const Vector fitted = samples_->evaluate(s.c);

  const Eigen::MatrixXd cz = f.solve_c_many(probe_rhs_);
  double quad = 0.0;
  for (Eigen::Index j = 0; j < cz.cols(); ++j) quad += probes_.col(j).dot(samples_->evaluate(cz.col(j)));
  const double n = samples_->size();
  GcvEvaluation e;
  e.alpha = alpha;
  e.rss = (fitted - *y_).squaredNorm();
  e.trace = n - quad / static_cast<double>(cz.cols());
  if (!(e.trace > 0)) {
    throw ScoreError("GCV trace estimate tr(I - H) = " + std::to_string(e.trace) + " is not positive");
  }
  e.score = n * e.rss / (e.trace * e.trace);
  solutions_[alpha] = std::move(s);
  history_.push_back(e);
  return e;
}

Smoother GcvObjective::smoother(double alpha) {
  if (auto it = solutions_.find(alpha); it != solutions_.end()) return it->second;
  return solve(*system_, *mesh_, alpha);
}

namespace {

double guarded(const std::function<double(double)>& score, double alpha) {
  try {
    const double v = score(alpha);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  } catch (const ScoreError&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

AlphaSearch alpha_initial(const std::function<double(double)>& score, const GcvConfig& config) {
  config.validate();
  AlphaSearch out;
  auto f = [&](double log_alpha) {
    const double alpha = std::pow(10.0, log_alpha);
    const double v = guarded(score, alpha);
    out.trace.emplace_back(alpha, v);
    return v;
  };
  // Boost's Brent performs one evaluation before its first iteration.
  std::uintmax_t iterations = static_cast<std::uintmax_t>(config.max_evals - 1);
  const auto [x, fx] = boost::math::tools::brent_find_minima(f, std::log10(config.alpha_lo),
                                                             std::log10(config.alpha_hi),
                                                             std::numeric_limits<double>::digits / 2, iterations);
  (void)x;
  (void)fx;
  // Report the best evaluated point (Brent returns it as well, up to rounding
  // of the power-of-ten mapping).
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [a, v] : out.trace) {
    if (v < best) {
      best = v;
      out.alpha = a;
    }
  }
  if (!std::isfinite(best)) throw ScoreError("GCV score is not finite anywhere in the alpha bracket");
  out.alpha = std::clamp(out.alpha, config.alpha_lo, config.alpha_hi);
  out.score = best;
  return out;
}

AlphaSearch alpha_update(double alpha_prev, const std::function<double(double)>& score, const GcvConfig& config) {
  config.validate();
  if (!(alpha_prev > 0)) throw ConfigError("previous alpha must be positive");
  std::vector<double> candidates{alpha_prev, config.r1 * alpha_prev, config.r2 * alpha_prev};
  std::sort(candidates.begin(), candidates.end(), std::greater<>());
  AlphaSearch out;
  out.score = std::numeric_limits<double>::infinity();
  for (double a : candidates) {
    const double v = score(a);
    out.trace.emplace_back(a, v);
    if (v < out.score || out.trace.size() == 1) {
      out.score = v;
      out.alpha = a;
    }
  }
  return out;
}

}  // namespace tpsfem
