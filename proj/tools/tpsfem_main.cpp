// Command-line front end: fit, compare and gen-peaks.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "tpsfem/compare.hpp"
#include "tpsfem/data.hpp"
#include "tpsfem/driver.hpp"
#include "tpsfem/error.hpp"
#include "tpsfem/io.hpp"

namespace fs = std::filesystem;
using namespace tpsfem;
using json = nlohmann::ordered_json;

namespace {

const Box kPeaksDomain{-3.0, 3.0, -3.0, 3.0};
const Box kPeaksData{-2.4, 2.4, -2.4, 2.4};
const Box kUnitDomain{0.0, 1.0, 0.0, 1.0};
const Box kUnitData{0.2, 0.8, 0.2, 0.8};

double parse_number(const std::string& text, const std::string& flag) {
  std::string t = text;
  for (char& ch : t) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (t == "inf" || t == "infinity" || t == "+inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(flag + ": '" + text + "' is not a number");
  }
}

Box parse_box(const std::string& text, const std::string& flag) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) v.push_back(parse_number(item, flag));
  if (v.size() != 4) throw ConfigError(flag + " expects x_lo,x_hi,y_lo,y_hi");
  const Box b{v[0], v[1], v[2], v[3]};
  if (!(b.x_lo < b.x_hi && b.y_lo < b.y_hi)) throw ConfigError(flag + " describes an empty box");
  return b;
}

json box_json(const Box& b) { return json::array({b.x_lo, b.x_hi, b.y_lo, b.y_hi}); }

/// Options shared by fit and compare for choosing the input data.
struct DataOptions {
  std::string path;
  int gen_peaks = 0;
  double sigma = 0.02;
  std::uint64_t seed = 1;
  std::string fit_into;
};

void add_data_options(CLI::App* cmd, DataOptions& o) {
  cmd->add_option("--data", o.path, "XYZ file with one 'x y z' record per line");
  cmd->add_option("--gen-peaks", o.gen_peaks, "Generate N noisy peaks samples instead of reading --data");
  cmd->add_option("--sigma", o.sigma, "Noise standard deviation for --gen-peaks");
  cmd->add_option("--seed", o.seed, "Seed for data generation and GCV probes");
  cmd->add_option("--fit-into", o.fit_into, "Map the data cloud into the box x_lo,x_hi,y_lo,y_hi");
}

struct InputData {
  ScatteredData data;
  AffineMap map;
  bool generated = false;
};

InputData load_input(const DataOptions& o, const std::optional<Box>& default_target) {
  if (o.path.empty() == (o.gen_peaks <= 0)) throw ConfigError("give exactly one of --data or --gen-peaks N");
  if (o.sigma < 0) throw ConfigError("--sigma must be non-negative");
  std::optional<Box> target = default_target;
  if (!o.fit_into.empty()) target = parse_box(o.fit_into, "--fit-into");
  InputData in;
  if (!o.path.empty()) {
    LoadedData loaded = load_xyz(o.path, target);
    in.data = std::move(loaded.data);
    in.map = loaded.map;
    return in;
  }
  in.generated = true;
  in.data = gen_peaks(o.gen_peaks, kPeaksData, {o.sigma, o.seed});
  if (target) {
    in.map = AffineMap::fit(kPeaksData, *target);
    for (Point& p : in.data.points) p = in.map.forward(p);
  }
  return in;
}

struct FitOptions {
  DataOptions data;
  std::string domain = "square";
  std::string box;
  std::string bc = "dirichlet";
  std::optional<double> bc_s, bc_u1, bc_u2;
  bool bc_peaks = false;
  std::string refine = "adaptive";
  std::optional<std::string> indicator;
  std::string tol = "0";
  std::optional<int> max_iters;
  double gamma = 0.75;
  int probes = 16;
  int raster = 101;
  bool no_timings = false;
  std::string out = "out";
};

int cmd_fit(const FitOptions& o) {
  RefineConfig cfg;
  cfg.mode = parse_refine_mode(o.refine);
  if (o.indicator) {
    if (cfg.mode != RefineMode::adaptive) throw ConfigError("--indicator requires --refine adaptive");
    cfg.indicator = parse_indicator(*o.indicator);
  }
  cfg.rmse_tol = parse_number(o.tol, "--tol");
  if (o.max_iters) cfg.max_outer_iters = *o.max_iters;
  cfg.gamma = o.gamma;
  cfg.gcv.probes = o.probes;
  cfg.gcv.seed = o.data.seed;
  cfg.record_timings = !o.no_timings;
  cfg.validate();

  const bool peaks_frame = o.data.gen_peaks > 0 && o.data.fit_into.empty();
  const Box box = !o.box.empty() ? parse_box(o.box, "--box") : (peaks_frame ? kPeaksDomain : kUnitDomain);
  DomainSpec domain = parse_domain_shape(o.domain) == DomainShape::square ? DomainSpec::square(box)
                                                                           : DomainSpec::lshape(box);
  domain.validate();

  BoundarySpec boundary;
  json bc_json;
  if (o.bc == "neumann") {
    if (o.bc_s || o.bc_u1 || o.bc_u2 || o.bc_peaks) throw ConfigError("boundary values need --bc dirichlet");
    boundary.kind = BoundaryKind::neumann;
    bc_json = {{"kind", "neumann"}};
  } else if (o.bc == "dirichlet") {
    boundary.kind = BoundaryKind::dirichlet;
    if (o.bc_peaks) {
      if (o.bc_s || o.bc_u1 || o.bc_u2) throw ConfigError("--bc-peaks excludes --bc-s/--bc-u1/--bc-u2");
      if (!peaks_frame) throw ConfigError("--bc-peaks needs unmapped --gen-peaks data");
      boundary.values = {[](const Point& p) { return peaks(p.x(), p.y()); },
                         [](const Point& p) { return peaks_gradient(p.x(), p.y()).x(); },
                         [](const Point& p) { return peaks_gradient(p.x(), p.y()).y(); }, nullptr};
      bc_json = {{"kind", "dirichlet"}, {"values", "peaks"}};
    } else {
      const double s = o.bc_s.value_or(0.0), u1 = o.bc_u1.value_or(0.0), u2 = o.bc_u2.value_or(0.0);
      boundary.values = BoundaryValues::constant(s, u1, u2);
      bc_json = {{"kind", "dirichlet"}, {"s", s}, {"u1", u1}, {"u2", u2}};
    }
  } else {
    throw ConfigError("--bc must be dirichlet or neumann");
  }
  if (o.raster < 2) throw ConfigError("--raster must be at least 2");

  const InputData input = load_input(o.data, std::nullopt);
  fs::create_directories(o.out);
  const RunResult result = run(input.data, domain, boundary, cfg);

  std::vector<std::string> outputs;
  auto path = [&](const std::string& name) {
    outputs.push_back(name);
    return (fs::path(o.out) / name).string();
  };
  write_json(path("mesh.json"), mesh_to_json(*result.mesh));
  write_json(path("smoother.json"), smoother_to_json(result.smoother));
  write_metrics_csv(path("metrics.csv"), result.records);
  write_gcv_trace_csv(path("gcv_trace.csv"), result.gcv_trace);
  write_surface_csv(path("surface.csv"), result.smoother, domain, o.raster);
  if (!result.last_field.values.empty()) write_indicator_csv(path("indicator.csv"), *result.mesh, result.last_field);
  if (!result.outside.empty()) write_outside_csv(path("outside.csv"), input.data, result.outside);

  json meta;
  meta["command"] = "fit";
  meta["seeds"] = {{"data", o.data.seed}, {"gcv", cfg.gcv.seed}};
  meta["data"] = {{"source", input.generated ? "gen-peaks" : o.data.path},
                  {"n_input", input.data.size()},
                  {"n_fitted", result.fitted_data.size()},
                  {"n_outside", result.outside.size()},
                  {"sigma", input.generated ? json(o.data.sigma) : json(nullptr)},
                  {"map", {{"scale", input.map.scale},
                           {"from", {input.map.from.x(), input.map.from.y()}},
                           {"to", {input.map.to.x(), input.map.to.y()}}}}};
  meta["config"] = {{"refine", to_string(cfg.mode)},
                    {"indicator", cfg.mode == RefineMode::adaptive ? json(to_string(cfg.indicator)) : json(nullptr)},
                    {"rmse_tol", std::isinf(cfg.rmse_tol) ? json("inf") : json(cfg.rmse_tol)},
                    {"max_outer_iters", cfg.outer_limit()},
                    {"doubling_factor", cfg.doubling_factor},
                    {"gamma", cfg.gamma},
                    {"stall_threshold", cfg.stall_threshold},
                    {"stall_count", cfg.stall_count},
                    {"gcv", {{"alpha_lo", cfg.gcv.alpha_lo}, {"alpha_hi", cfg.gcv.alpha_hi},
                             {"probes", cfg.gcv.probes}, {"r1", cfg.gcv.r1}, {"r2", cfg.gcv.r2}}},
                    {"timings", cfg.record_timings}};
  meta["domain"] = {{"shape", to_string(domain.shape)}, {"box", box_json(domain.box)}};
  meta["boundary"] = bc_json;
  meta["stop_reason"] = result.stop_reason;
  meta["skipped_edges"] = result.skipped_edges;
  meta["final"] = {{"nodes", result.records.back().nodes},
                   {"alpha", result.records.back().alpha},
                   {"rmse", result.records.back().metrics.rmse}};
  outputs.push_back("run.json");
  meta["outputs"] = outputs;
  write_json((fs::path(o.out) / "run.json").string(), meta);

  const IterationRecord& last = result.records.back();
  std::cerr << "fit: " << result.records.size() << " solves, " << last.nodes << " nodes, rmse " << last.metrics.rmse
            << ", stop: " << result.stop_reason << '\n';
  return 0;
}

struct CompareOptions {
  DataOptions data;
  std::vector<double> spacings{0.02};
  std::vector<int> targets{100, 200};
  int tpsfem_grid = 65;
  std::string bc = "dirichlet";
  int probes = 16;
  bool no_timings = false;
  std::string out = "out";
};

int cmd_compare(const CompareOptions& o) {
  CompareConfig cfg;
  for (double h : o.spacings)
    if (!(h > 0)) throw ConfigError("--spacing values must be positive");
  for (int t : o.targets)
    if (t < 1) throw ConfigError("--targets values must be positive");
  if (o.tpsfem_grid != 0 && o.tpsfem_grid < 2) throw ConfigError("--tpsfem-grid must be 0 or at least 2");
  cfg.spacings = o.spacings;
  cfg.coverage_targets = o.targets;
  cfg.tpsfem_nodes_per_side = o.tpsfem_grid;
  cfg.region = kUnitData;
  cfg.domain = DomainSpec::square(kUnitDomain);
  if (o.bc == "neumann") {
    cfg.boundary.kind = BoundaryKind::neumann;
  } else if (o.bc != "dirichlet") {
    throw ConfigError("--bc must be dirichlet or neumann");
  }
  cfg.gcv.probes = o.probes;
  cfg.gcv.seed = o.data.seed;
  cfg.record_timings = !o.no_timings;
  cfg.gcv.validate();

  const InputData input = load_input(o.data, kUnitData);
  fs::create_directories(o.out);
  const std::vector<ReportRow> rows = run_comparison(input.data, cfg);
  write_report_csv((fs::path(o.out) / "report.csv").string(), rows);

  json meta;
  meta["command"] = "compare";
  meta["seeds"] = {{"data", o.data.seed}, {"gcv", cfg.gcv.seed}};
  meta["data"] = {{"source", input.generated ? "gen-peaks" : o.data.path}, {"n_input", input.data.size()}};
  meta["config"] = {{"spacings", o.spacings}, {"targets", o.targets}, {"tpsfem_grid", o.tpsfem_grid},
                    {"timings", cfg.record_timings}};
  meta["domain"] = {{"shape", "square"}, {"box", box_json(kUnitDomain)}, {"region", box_json(kUnitData)}};
  meta["boundary"] = {{"kind", o.bc}};
  meta["outputs"] = {"report.csv", "run.json"};
  write_json((fs::path(o.out) / "run.json").string(), meta);
  std::cerr << "compare: " << rows.size() << " rows\n";
  return 0;
}

struct GenOptions {
  int n = 62500;
  double sigma = 0.02;
  std::uint64_t seed = 1;
  std::string out = "peaks.xyz";
};

int cmd_gen_peaks(const GenOptions& o) {
  if (o.n < 1) throw ConfigError("--n must be positive");
  if (o.sigma < 0) throw ConfigError("--sigma must be non-negative");
  write_xyz(o.out, gen_peaks(o.n, kPeaksData, {o.sigma, o.seed}));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thin-plate-spline finite element smoothing with adaptive refinement"};
  app.require_subcommand(1);

  FitOptions fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit a smoother to scattered data");
  add_data_options(fit_cmd, fit.data);
  fit_cmd->add_option("--domain", fit.domain, "square or lshape");
  fit_cmd->add_option("--box", fit.box, "Domain bounding box x_lo,x_hi,y_lo,y_hi");
  fit_cmd->add_option("--bc", fit.bc, "dirichlet or neumann");
  fit_cmd->add_option("--bc-s", fit.bc_s, "Dirichlet value of s");
  fit_cmd->add_option("--bc-u1", fit.bc_u1, "Dirichlet value of u1");
  fit_cmd->add_option("--bc-u2", fit.bc_u2, "Dirichlet value of u2");
  fit_cmd->add_flag("--bc-peaks", fit.bc_peaks, "Dirichlet values from the exact peaks function");
  fit_cmd->add_option("--refine", fit.refine, "uniform or adaptive");
  fit_cmd->add_option("--indicator", fit.indicator, "regression, auxiliary, residual, recovery or norm");
  fit_cmd->add_option("--tol", fit.tol, "RMSE tolerance (number or inf)");
  fit_cmd->add_option("--max-iters", fit.max_iters, "Outer refinement iterations");
  fit_cmd->add_option("--gamma", fit.gamma, "Marking fraction of the largest indicator value");
  fit_cmd->add_option("--probes", fit.probes, "Hutchinson probe vectors");
  fit_cmd->add_option("--raster", fit.raster, "Surface samples per side");
  fit_cmd->add_flag("--no-timings", fit.no_timings, "Record zero wall times");
  fit_cmd->add_option("--out", fit.out, "Output directory");

  CompareOptions cmp;
  CLI::App* cmp_cmd = app.add_subcommand("compare", "Compare TPSFEM with RBF smoothers");
  add_data_options(cmp_cmd, cmp.data);
  cmp_cmd->add_option("--spacing", cmp.spacings, "Control-grid spacings")->delimiter(',');
  cmp_cmd->add_option("--targets", cmp.targets, "Control points per CSRBF support")->delimiter(',');
  cmp_cmd->add_option("--tpsfem-grid", cmp.tpsfem_grid, "Nodes per side of the TPSFEM grid (0 skips)");
  cmp_cmd->add_option("--bc", cmp.bc, "dirichlet (zero values) or neumann");
  cmp_cmd->add_option("--probes", cmp.probes, "Hutchinson probe vectors");
  cmp_cmd->add_flag("--no-timings", cmp.no_timings, "Record zero wall times");
  cmp_cmd->add_option("--out", cmp.out, "Output directory");

  GenOptions gen;
  CLI::App* gen_cmd = app.add_subcommand("gen-peaks", "Write noisy peaks samples as XYZ");
  gen_cmd->add_option("--n,--gen-peaks", gen.n, "Number of samples");
  gen_cmd->add_option("--sigma", gen.sigma, "Noise standard deviation");
  gen_cmd->add_option("--seed", gen.seed, "Generator seed");
  gen_cmd->add_option("--out", gen.out, "Output XYZ path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*fit_cmd) return cmd_fit(fit);
    if (*cmp_cmd) return cmd_compare(cmp);
    if (*gen_cmd) return cmd_gen_peaks(gen);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
