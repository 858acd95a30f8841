#pragma once

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "tpsfem/assembly.hpp"
#include "tpsfem/data.hpp"
#include "tpsfem/domain.hpp"
#include "tpsfem/gcv.hpp"
#include "tpsfem/indicators.hpp"
#include "tpsfem/mesh.hpp"
#include "tpsfem/solver.hpp"

namespace tpsfem {

enum class RefineMode { uniform, adaptive };

std::string to_string(RefineMode mode);
RefineMode parse_refine_mode(const std::string& s);

struct RefineConfig {
  RefineMode mode = RefineMode::adaptive;
  IndicatorKind indicator = IndicatorKind::recovery;
  double rmse_tol = 0.0;
  /// Outer refinement iterations; negative selects 10 (uniform) or 8 (adaptive).
  int max_outer_iters = -1;
  double doubling_factor = 2.0;
  double gamma = 0.75;
  double stall_threshold = 0.10;
  /// Consecutive low-improvement iterations that stop an adaptive run; 0
  /// disables. Uniform runs always perform their full sweep count.
  int stall_count = 2;
  double c1 = 1.0;
  double c2 = 1.0;
  int initial_nodes_per_side = 5;
  GcvConfig gcv;
  /// Set false to record zero wall times (for byte-identical outputs).
  bool record_timings = true;

  int outer_limit() const { return max_outer_iters >= 0 ? max_outer_iters : (mode == RefineMode::uniform ? 10 : 8); }
  /// Throws ConfigError.
  void validate() const;
};

struct BoundarySpec {
  BoundaryKind kind = BoundaryKind::dirichlet;
  /// Used on Dirichlet edges.
  BoundaryValues values = BoundaryValues::constant(0.0, 0.0, 0.0);
};

struct IterationRecord {
  int iter = 0;
  int nodes = 0;
  double alpha = 0.0;
  FitMetrics metrics;
  double solve_s = 0.0;
  double build_s = 0.0;
  double indicator_s = 0.0;
};

struct GcvTraceRow {
  int iter = 0;
  double alpha = 0.0;
  double score = 0.0;
};

struct RunResult {
  std::unique_ptr<TriMesh> mesh;
  Smoother smoother;
  std::vector<IterationRecord> records;
  std::vector<GcvTraceRow> gcv_trace;
  /// In-domain data actually fitted and its buckets on the final mesh.
  ScatteredData fitted_data;
  DataBuckets buckets;
  /// Indices into the input data that fell outside the domain.
  std::vector<int> outside;
  /// "tolerance", "stall" or "max_iters".
  std::string stop_reason;
  /// Indicator field of the last adaptive outer iteration (empty for uniform runs).
  IndicatorField last_field;
  int skipped_edges = 0;
};

/// Edges with eta >= gamma * max eta over `eligible`, in descending eta order
/// (ties by id). Never empty when `eligible` holds a defined value.
std::vector<EdgeId> mark(const IndicatorField& field, double gamma, const std::vector<EdgeId>& eligible);

/// Outer solve/refine loop: GCV-selected alpha, full solve, then refinement
/// (uniform sweeps or indicator-driven bisection until the node count has
/// grown by the doubling factor) until the RMSE tolerance, the stall rule or
/// the iteration limit stops it.
RunResult run(const ScatteredData& data, const DomainSpec& domain, const BoundarySpec& boundary,
              const RefineConfig& config);

}  // namespace tpsfem
