#include "tpsfem/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "tpsfem/error.hpp"

namespace tpsfem {

std::string to_string(RefineMode mode) { return mode == RefineMode::uniform ? "uniform" : "adaptive"; }

RefineMode parse_refine_mode(const std::string& s) {
  if (s == "uniform") return RefineMode::uniform;
  if (s == "adaptive") return RefineMode::adaptive;
  throw ConfigError("unknown refinement mode '" + s + "' (expected uniform|adaptive)");
}

void RefineConfig::validate() const {
  if (!(gamma > 0 && gamma <= 1)) throw ConfigError("mark fraction gamma must lie in (0, 1]");
  if (!(rmse_tol >= 0)) throw ConfigError("rmse tolerance must be non-negative");
  if (!(doubling_factor > 1)) throw ConfigError("doubling factor must exceed 1");
  if (stall_count < 0) throw ConfigError("stall count must be non-negative");
  if (initial_nodes_per_side < 2) throw ConfigError("initial grid needs at least 2 nodes per side");
  gcv.validate();
}

std::vector<EdgeId> mark(const IndicatorField& field, double gamma, const std::vector<EdgeId>& eligible) {
  double top = -1.0;
  for (EdgeId e : eligible)
    if (field.has(e)) top = std::max(top, field.at(e));
  std::vector<EdgeId> out;
  if (top < 0) return out;
  const double threshold = gamma * top;
  for (EdgeId e : eligible)
    if (field.has(e) && field.at(e) >= threshold) out.push_back(e);
  std::sort(out.begin(), out.end(), [&](EdgeId a, EdgeId b) {
    return field.at(a) != field.at(b) ? field.at(a) > field.at(b) : a < b;
  });
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

class Stopwatch {
 public:
  explicit Stopwatch(bool enabled) : enabled_(enabled), start_(Clock::now()) {}
  double seconds() const {
    return enabled_ ? std::chrono::duration<double>(Clock::now() - start_).count() : 0.0;
  }

 private:
  bool enabled_;
  Clock::time_point start_;
};

void extend_by_averaging(Smoother& s, const TriMesh& mesh) {
  const int old_m = s.m();
  const int m = mesh.node_count();
  if (m == old_m) return;
  for (Vector* v : {&s.c, &s.g1, &s.g2, &s.w}) {
    v->conservativeResize(m);
    for (NodeId p = old_m; p < m; ++p) {
      const auto [a, b] = mesh.node_parents(p);
      (*v)[p] = 0.5 * ((*v)[a] + (*v)[b]);
    }
  }
}

}  // namespace

RunResult run(const ScatteredData& input, const DomainSpec& domain, const BoundarySpec& boundary,
              const RefineConfig& config) {
  config.validate();
  domain.validate();
  if (input.size() == 0) throw EmptyDataError("no data to fit");

  RunResult out;
  out.mesh = std::make_unique<TriMesh>(build_initial_grid(domain, config.initial_nodes_per_side, boundary.kind));
  TriMesh& mesh = *out.mesh;

  {
    const DataBuckets initial = locate(mesh, input);
    out.outside = initial.outside;
    std::vector<int> inside;
    inside.reserve(static_cast<std::size_t>(input.size()));
    for (int i = 0; i < input.size(); ++i)
      if (initial.owner[i] != kNone) inside.push_back(i);
    if (inside.empty()) throw EmptyDataError("no data point lies inside the domain");
    out.fitted_data = input.subset(inside);
  }
  const ScatteredData& data = out.fitted_data;
  out.buckets = locate(mesh, data);

  double alpha = 0.0;
  int stall_run = 0;
  for (int iter = 0;; ++iter) {
    IterationRecord rec;
    rec.iter = iter;

    // Build and solve on the current mesh.
    const Stopwatch build_clock(config.record_timings);
    const BasisSamples samples = basis_samples(mesh, data, out.buckets);
    TpsfemSystem system = assemble_system(mesh, samples, data.y);
    apply_boundary(system, mesh, boundary.values);
    rec.build_s = build_clock.seconds();

    const Stopwatch solve_clock(config.record_timings);
    try {
      GcvObjective objective(system, mesh, samples, data.y, config.gcv);
      auto score = [&](double a) { return objective(a); };
      const AlphaSearch search =
          iter == 0 ? alpha_initial(score, config.gcv) : alpha_update(alpha, score, config.gcv);
      for (const auto& [a, v] : search.trace) out.gcv_trace.push_back({iter, a, v});
      alpha = search.alpha;
      out.smoother = objective.smoother(alpha);
    } catch (const SolverError&) {
      // Keep what was computed so far; the smoother stays the averaged
      // extension of the last successful solve.
      if (out.records.empty()) throw;
      out.stop_reason = "solver_error";
      break;
    }
    rec.solve_s = solve_clock.seconds();

    rec.nodes = mesh.node_count();
    rec.alpha = alpha;
    rec.metrics = fit_metrics(samples.evaluate(out.smoother.c), data.y);
    rec.indicator_s = 0.0;

    if (!out.records.empty()) {
      const double prev = out.records.back().metrics.rmse;
      const double improvement = prev > 0 ? (prev - rec.metrics.rmse) / prev : 0.0;
      stall_run = improvement < config.stall_threshold ? stall_run + 1 : 0;
    }
    out.records.push_back(rec);

    if (rec.metrics.rmse <= config.rmse_tol) {
      out.stop_reason = "tolerance";
      break;
    }
    if (config.mode == RefineMode::adaptive && config.stall_count > 0 && stall_run >= config.stall_count) {
      out.stop_reason = "stall";
      break;
    }
    if (iter >= config.outer_limit()) {
      out.stop_reason = "max_iters";
      break;
    }

    // Refine.
    const int entry_nodes = mesh.node_count();
    if (config.mode == RefineMode::uniform) {
      const RefinementDelta delta = uniform_refine(mesh);
      rebucket(mesh, data, delta, out.buckets);
      extend_by_averaging(out.smoother, mesh);
      continue;
    }

    const Stopwatch indicator_clock(config.record_timings);
    IndicatorContext ctx;
    ctx.mesh = &mesh;
    ctx.smoother = &out.smoother;
    ctx.data = &data;
    ctx.buckets = &out.buckets;
    ctx.n_total = data.size();
    ctx.alpha = alpha;
    ctx.c1 = config.c1;
    ctx.c2 = config.c2;
    IndicatorField field = compute_indicators(config.indicator, ctx);
    out.skipped_edges += static_cast<int>(field.failed.size());
    double indicator_s = indicator_clock.seconds();

    const auto target = static_cast<int>(std::ceil(config.doubling_factor * entry_nodes));
    while (mesh.node_count() < target) {
      const std::vector<EdgeId> eligible = refinable_edges(mesh);
      std::vector<EdgeId> marked = mark(field, config.gamma, eligible);
      if (marked.empty()) marked = eligible;  // every value failed: fall back to all edges
      std::vector<TriId> created;
      for (EdgeId e : marked) {
        if (mesh.node_count() >= target) break;
        if (!mesh.edge(e).alive || !mesh.is_refinable(e)) continue;
        const RefinementDelta delta = mesh.bisect_edge(e);
        rebucket(mesh, data, delta, out.buckets);
        extend_by_averaging(out.smoother, mesh);
        created.insert(created.end(), delta.new_triangles.begin(), delta.new_triangles.end());
      }

      // Values for edges that are new or whose element pair changed; old
      // values stay frozen for the rest of this outer iteration.
      const Stopwatch update_clock(config.record_timings);
      std::vector<EdgeId> stale;
      for (TriId t : created) {
        if (!mesh.triangle(t).active) continue;
        for (EdgeId e : mesh.triangle(t).edges) stale.push_back(e);
      }
      for (EdgeId e : refinable_edges(mesh))
        if (!field.has(e)) stale.push_back(e);
      std::sort(stale.begin(), stale.end());
      stale.erase(std::unique(stale.begin(), stale.end()), stale.end());
      stale.erase(std::remove_if(stale.begin(), stale.end(), [&](EdgeId e) { return !mesh.is_refinable(e); }),
                  stale.end());
      if (!stale.empty()) {
        const IndicatorField update = compute_indicators(config.indicator, ctx, stale);
        out.skipped_edges += static_cast<int>(update.failed.size());
        for (EdgeId e : stale) {
          if (update.has(e)) {
            field.set(e, update.at(e));
          } else if (field.has(e)) {
            field.set(e, std::numeric_limits<double>::quiet_NaN());
          }
        }
      }
      indicator_s += update_clock.seconds();
    }
    out.records.back().indicator_s = indicator_s;
    out.last_field = std::move(field);
  }
  return out;
}

}  // namespace tpsfem
