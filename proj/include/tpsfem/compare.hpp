#pragma once

#include <vector>

#include "tpsfem/data.hpp"
#include "tpsfem/driver.hpp"
#include "tpsfem/io.hpp"
#include "tpsfem/rbf.hpp"

namespace tpsfem {

struct CompareConfig {
  /// Box the control-point grid is laid over.
  Box region{0.2, 0.8, 0.2, 0.8};
  /// Control-grid spacings; one block of rows per spacing.
  std::vector<double> spacings{0.02};
  /// Control points expected inside each CSRBF support.
  std::vector<int> coverage_targets{100, 200};
  std::vector<KernelKind> kernels{KernelKind::tps, KernelKind::wendland_c0, KernelKind::wendland_c2,
                                  KernelKind::buhmann};
  /// TPSFEM row on a uniform square grid; 0 skips it.
  int tpsfem_nodes_per_side = 65;
  DomainSpec domain = DomainSpec::square(Box{});
  BoundarySpec boundary;
  GcvConfig gcv;
  bool record_timings = true;
};

/// TPSFEM on a uniform grid with a GCV-selected alpha. Reports the reduced
/// saddle matrix's nonzeros and fill, and the time of one factorise+solve.
ReportRow tpsfem_row(const ScatteredData& data, const CompareConfig& config);

/// All rows of the comparison: TPSFEM first, then, for each spacing, TPS and
/// every compactly supported kernel at every coverage radius.
std::vector<ReportRow> run_comparison(const ScatteredData& data, const CompareConfig& config);

}  // namespace tpsfem
