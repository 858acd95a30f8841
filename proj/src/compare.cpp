#include "tpsfem/compare.hpp"

#include <algorithm>
#include <chrono>
#include <limits>

#include "tpsfem/assembly.hpp"
#include "tpsfem/error.hpp"
#include "tpsfem/gcv.hpp"
#include "tpsfem/solver.hpp"

namespace tpsfem {

ReportRow tpsfem_row(const ScatteredData& input, const CompareConfig& config) {
  const TriMesh mesh = build_initial_grid(config.domain, config.tpsfem_nodes_per_side, config.boundary.kind);
  const DataBuckets all = locate(mesh, input);
  std::vector<int> inside;
  for (int i = 0; i < input.size(); ++i)
    if (all.owner[i] != kNone) inside.push_back(i);
  if (inside.empty()) throw EmptyDataError("no data point lies inside the comparison domain");
  const ScatteredData data = input.subset(inside);
  const DataBuckets buckets = locate(mesh, data);
  const BasisSamples samples = basis_samples(mesh, data, buckets);
  TpsfemSystem system = assemble_system(mesh, samples, data.y);
  apply_boundary(system, mesh, config.boundary.values);

  GcvObjective objective(system, mesh, samples, data.y, config.gcv);
  const AlphaSearch search = alpha_initial([&](double a) { return objective(a); }, config.gcv);

  const auto start = std::chrono::steady_clock::now();
  const Smoother s = solve(system, mesh, search.alpha);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const SaddleFactorization probe(system, search.alpha);

  ReportRow row;
  row.technique = "tpsfem";
  row.kernel = "p1";
  row.n_basis = mesh.node_count();
  row.radius = std::numeric_limits<double>::quiet_NaN();
  row.nnz = probe.nonzeros();
  const double dim = probe.unknowns();
  row.ratio = static_cast<double>(row.nnz) / (dim * dim);
  row.time_s = config.record_timings ? elapsed : 0.0;
  row.rmse = rmse(samples.evaluate(s.c), data.y);
  return row;
}

std::vector<ReportRow> run_comparison(const ScatteredData& data, const CompareConfig& config) {
  if (data.size() == 0) throw EmptyDataError("no data to compare on");
  std::vector<ReportRow> rows;
  if (config.tpsfem_nodes_per_side > 0) rows.push_back(tpsfem_row(data, config));
  for (double h : config.spacings) {
    const ControlPointSet cp = select_control_points(data, config.region, h);
    auto add = [&](KernelKind kind, double radius) {
      const RbfFit fit = fit_rbf(data, cp, kind, radius);
      ReportRow row;
      row.technique = compactly_supported(kind) ? "csrbf" : "tps";
      row.kernel = to_string(kind);
      if (fit.regularized) row.kernel += "+ridge";
      row.n_basis = cp.size();
      row.radius = compactly_supported(kind) ? radius : std::numeric_limits<double>::quiet_NaN();
      row.nnz = fit.stats.nnz;
      row.ratio = fit.stats.ratio;
      row.time_s = config.record_timings ? fit.time_s : 0.0;
      row.rmse = fit.rmse;
      rows.push_back(row);
    };
    for (KernelKind kind : config.kernels)
      if (!compactly_supported(kind)) add(kind, 0.0);
    for (int target : config.coverage_targets) {
      const double radius = radius_for_coverage(cp.points, cp.points, std::min(target, cp.size()));
      for (KernelKind kind : config.kernels)
        if (compactly_supported(kind)) add(kind, radius);
    }
  }
  return rows;
}

}  // namespace tpsfem
