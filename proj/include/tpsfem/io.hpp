#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "tpsfem/data.hpp"
#include "tpsfem/domain.hpp"
#include "tpsfem/driver.hpp"
#include "tpsfem/indicators.hpp"
#include "tpsfem/mesh.hpp"
#include "tpsfem/solver.hpp"

namespace tpsfem {

/// Active mesh as {"nodes": [[x,y],...], "triangles": [[a,b,c],...],
/// "levels": [...], "boundary": [[a,b,"dirichlet"|"neumann"],...]}.
/// Triangle vertices are counter-clockwise with the newest node first.
nlohmann::ordered_json mesh_to_json(const TriMesh& mesh);
nlohmann::ordered_json smoother_to_json(const Smoother& s);

void write_json(const std::string& path, const nlohmann::ordered_json& json);
nlohmann::ordered_json read_json(const std::string& path);

void write_metrics_csv(const std::string& path, const std::vector<IterationRecord>& records);
void write_gcv_trace_csv(const std::string& path, const std::vector<GcvTraceRow>& rows);

/// "x,y,s" on a raster x raster grid over the domain's bounding box; points
/// outside the domain are omitted.
void write_surface_csv(const std::string& path, const Smoother& s, const DomainSpec& domain, int raster);

/// "edge_id,x_mid,y_mid,eta" for every edge with a value.
void write_indicator_csv(const std::string& path, const TriMesh& mesh, const IndicatorField& field);

/// "index,x,y" for the given data indices.
void write_outside_csv(const std::string& path, const ScatteredData& data, const std::vector<int>& indices);

struct ReportRow {
  std::string technique;
  std::string kernel;
  int n_basis = 0;
  /// NaN when the technique has no radius.
  double radius = 0.0;
  long nnz = 0;
  double ratio = 0.0;
  double time_s = 0.0;
  double rmse = 0.0;
};

void write_report_csv(const std::string& path, const std::vector<ReportRow>& rows);

}  // namespace tpsfem
