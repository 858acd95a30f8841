#include "tpsfem/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "tpsfem/error.hpp"

namespace tpsfem {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  return out;
}

/// Shortest round-trip text for a double; "nan"/"inf" when not finite.
std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  for (int prec = 6; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

nlohmann::ordered_json mesh_to_json(const TriMesh& mesh) {
  // Arrays are filled before insertion: ordered_json stores members in a
  // vector, so references into it do not survive later insertions.
  auto nodes = nlohmann::ordered_json::array();
  for (const Point& p : mesh.nodes()) nodes.push_back({p.x(), p.y()});
  auto tris = nlohmann::ordered_json::array();
  auto levels = nlohmann::ordered_json::array();
  for (TriId t : mesh.active_triangles()) {
    const Triangle& tri = mesh.triangle(t);
    tris.push_back({tri.nodes[0], tri.nodes[1], tri.nodes[2]});
    levels.push_back(tri.level);
  }
  auto boundary = nlohmann::ordered_json::array();
  for (EdgeId e : mesh.active_edges()) {
    const Edge& edge = mesh.edge(e);
    if (!edge.on_boundary) continue;
    boundary.push_back({edge.nodes[0], edge.nodes[1],
                        edge.boundary_kind == BoundaryKind::dirichlet ? "dirichlet" : "neumann"});
  }
  nlohmann::ordered_json j;
  j["nodes"] = std::move(nodes);
  j["triangles"] = std::move(tris);
  j["levels"] = std::move(levels);
  j["boundary"] = std::move(boundary);
  return j;
}

nlohmann::ordered_json smoother_to_json(const Smoother& s) {
  nlohmann::ordered_json j;
  j["alpha"] = s.alpha;
  j["c"] = to_std(s.c);
  j["g1"] = to_std(s.g1);
  j["g2"] = to_std(s.g2);
  j["w"] = to_std(s.w);
  return j;
}

void write_json(const std::string& path, const nlohmann::ordered_json& json) {
  auto out = open_out(path);
  out << json.dump(1) << '\n';
}

nlohmann::ordered_json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

void write_metrics_csv(const std::string& path, const std::vector<IterationRecord>& records) {
  auto out = open_out(path);
  out << "iter,nodes,alpha,rmse,rmspe,max,solve_s,build_s,indicator_s\n";
  for (const IterationRecord& r : records) {
    out << r.iter << ',' << r.nodes << ',' << num(r.alpha) << ',' << num(r.metrics.rmse) << ','
        << num(r.metrics.rmspe) << ',' << num(r.metrics.max) << ',' << num(r.solve_s) << ',' << num(r.build_s)
        << ',' << num(r.indicator_s) << '\n';
  }
}

void write_gcv_trace_csv(const std::string& path, const std::vector<GcvTraceRow>& rows) {
  auto out = open_out(path);
  out << "iter,alpha,score\n";
  for (const GcvTraceRow& r : rows) out << r.iter << ',' << num(r.alpha) << ',' << num(r.score) << '\n';
}

void write_surface_csv(const std::string& path, const Smoother& s, const DomainSpec& domain, int raster) {
  if (raster < 2) throw ConfigError("surface raster needs at least 2 samples per side");
  auto out = open_out(path);
  out << "x,y,s\n";
  const Box& b = domain.box;
  for (int j = 0; j < raster; ++j) {
    for (int i = 0; i < raster; ++i) {
      const Point p(b.x_lo + b.width() * i / (raster - 1), b.y_lo + b.height() * j / (raster - 1));
      if (!domain.contains(p)) continue;
      out << num(p.x()) << ',' << num(p.y()) << ',' << num(evaluate(s, p)) << '\n';
    }
  }
}

void write_indicator_csv(const std::string& path, const TriMesh& mesh, const IndicatorField& field) {
  auto out = open_out(path);
  out << "edge_id,x_mid,y_mid,eta\n";
  for (EdgeId e : field.edges()) {
    const Edge& edge = mesh.edge(e);
    const Point mid = 0.5 * (mesh.node(edge.nodes[0]) + mesh.node(edge.nodes[1]));
    out << e << ',' << num(mid.x()) << ',' << num(mid.y()) << ',' << num(field.at(e)) << '\n';
  }
}

void write_outside_csv(const std::string& path, const ScatteredData& data, const std::vector<int>& indices) {
  auto out = open_out(path);
  out << "index,x,y\n";
  for (int i : indices) out << i << ',' << num(data.points[i].x()) << ',' << num(data.points[i].y()) << '\n';
}

void write_report_csv(const std::string& path, const std::vector<ReportRow>& rows) {
  auto out = open_out(path);
  out << "technique,kernel,n_basis,radius,nnz,ratio,time_s,rmse\n";
  for (const ReportRow& r : rows) {
    out << r.technique << ',' << r.kernel << ',' << r.n_basis << ',' << (std::isnan(r.radius) ? "" : num(r.radius))
        << ',' << r.nnz << ',' << num(r.ratio) << ',' << num(r.time_s) << ',' << num(r.rmse) << '\n';
  }
}

}  // namespace tpsfem
