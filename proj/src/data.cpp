#include "tpsfem/data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "tpsfem/element.hpp"
#include "tpsfem/error.hpp"
#include "tpsfem/spatial_index.hpp"

namespace tpsfem {

ScatteredData ScatteredData::subset(const std::vector<int>& indices) const {
  ScatteredData out;
  out.points.reserve(indices.size());
  out.y.resize(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) {
    out.points.push_back(points[indices[k]]);
    out.y[static_cast<Eigen::Index>(k)] = y[indices[k]];
  }
  return out;
}

Box bounding_box(const std::vector<Point>& points) {
  if (points.empty()) throw EmptyDataError("bounding box of an empty point set");
  Box b{points[0].x(), points[0].x(), points[0].y(), points[0].y()};
  for (const Point& p : points) {
    b.x_lo = std::min(b.x_lo, p.x());
    b.x_hi = std::max(b.x_hi, p.x());
    b.y_lo = std::min(b.y_lo, p.y());
    b.y_hi = std::max(b.y_hi, p.y());
  }
  return b;
}

AffineMap AffineMap::fit(const Box& source, const Box& target) {
  AffineMap map;
  map.from = source.center();
  map.to = target.center();
  const double sx = source.width() > 0 ? target.width() / source.width() : std::numeric_limits<double>::infinity();
  const double sy = source.height() > 0 ? target.height() / source.height() : std::numeric_limits<double>::infinity();
  map.scale = std::min(sx, sy);
  if (!std::isfinite(map.scale)) map.scale = 1.0;
  return map;
}

namespace {

bool parse_double(std::string_view token, double& out) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

LoadedData load_xyz(const std::string& path, const std::optional<Box>& target) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open data file '" + path + "'");
  LoadedData out;
  std::vector<double> values;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string token;
    double v[3];
    int count = 0;
    while (count < 3 && fields >> token) {
      if (!parse_double(token, v[count])) {
        throw ParseError("non-numeric field '" + token + "' in '" + path + "'", line_no);
      }
      ++count;
    }
    if (count == 0) continue;
    if (count < 3) throw ParseError("expected at least 3 fields in '" + path + "'", line_no);
    out.data.points.emplace_back(v[0], v[1]);
    values.push_back(v[2]);
  }
  if (out.data.points.empty()) throw EmptyDataError("data file '" + path + "' has no records");
  out.data.y = Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  if (target) {
    out.map = AffineMap::fit(bounding_box(out.data.points), *target);
    for (Point& p : out.data.points) p = out.map.forward(p);
  }
  return out;
}

void write_xyz(const std::string& path, const ScatteredData& data) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << std::setprecision(17);
  for (int i = 0; i < data.size(); ++i) {
    out << data.points[i].x() << ' ' << data.points[i].y() << ' ' << data.y[i] << '\n';
  }
  if (!out) throw Error("write failed for '" + path + "'");
}

ScatteredData sample_function(int n, const Box& region, const std::function<double(const Point&)>& f,
                              const NoiseSpec& noise, const std::function<bool(const Point&)>& accept) {
  if (n < 1) throw ConfigError("sample count must be at least 1");
  if (noise.sigma < 0) throw ConfigError("noise standard deviation must be non-negative");
  std::mt19937_64 rng(noise.seed);
  std::uniform_real_distribution<double> ux(region.x_lo, region.x_hi);
  std::uniform_real_distribution<double> uy(region.y_lo, region.y_hi);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ScatteredData out;
  out.points.reserve(static_cast<std::size_t>(n));
  out.y.resize(n);
  long attempts = 0;
  while (out.size() < n) {
    if (++attempts > 1000L * n + 1000) throw ConfigError("sampling acceptance region is (nearly) empty");
    const double x = ux(rng);
    const double y = uy(rng);
    const Point p(x, y);
    if (accept && !accept(p)) continue;
    out.y[out.size()] = f(p) + noise.sigma * gauss(rng);
    out.points.push_back(p);
  }
  return out;
}

ScatteredData gen_peaks(int n, const Box& region, const NoiseSpec& noise) {
  return sample_function(n, region, [](const Point& p) { return peaks(p.x(), p.y()); }, noise);
}

bool triangle_contains(const TriMesh& mesh, TriId t, const Point& p, double tol) {
  const auto& v = mesh.triangle(t).nodes;
  const Eigen::Vector3d l = barycentric<double>(mesh.node(v[0]), mesh.node(v[1]), mesh.node(v[2]), p);
  return l.minCoeff() >= -tol;
}

TriId Locator::walk(const Point& p, TriId t) const {
  const int limit = 4 * mesh_->active_triangle_count() + 16;
  for (int step = 0; step < limit; ++step) {
    const auto& tri = mesh_->triangle(t);
    const Eigen::Vector3d l =
        barycentric<double>(mesh_->node(tri.nodes[0]), mesh_->node(tri.nodes[1]), mesh_->node(tri.nodes[2]), p);
    Eigen::Index worst;
    if (l.minCoeff(&worst) >= -tol_) return t;
    const TriId next = mesh_->neighbour(t, static_cast<int>(worst));
    if (next == kNone) return kNone;
    t = next;
  }
  return kNone;
}

TriId Locator::scan(const Point& p) const {
  for (TriId t = 0; t < mesh_->triangle_capacity(); ++t) {
    if (mesh_->triangle(t).active && triangle_contains(*mesh_, t, p, tol_)) return t;
  }
  return kNone;
}

TriId Locator::smallest_containing(const Point& p, TriId t) const {
  // Breadth-first search over triangles that contain p, which covers the
  // fan around a vertex or the pair across an edge.
  std::vector<TriId> frontier{t};
  std::vector<TriId> seen{t};
  TriId best = t;
  while (!frontier.empty()) {
    const TriId cur = frontier.back();
    frontier.pop_back();
    for (int i = 0; i < 3; ++i) {
      const TriId nb = mesh_->neighbour(cur, i);
      if (nb == kNone || std::find(seen.begin(), seen.end(), nb) != seen.end()) continue;
      seen.push_back(nb);
      if (triangle_contains(*mesh_, nb, p, tol_)) {
        best = std::min(best, nb);
        frontier.push_back(nb);
      }
    }
  }
  return best;
}

TriId Locator::locate(const Point& p) {
  TriId start = last_;
  if (start == kNone || start >= mesh_->triangle_capacity() || !mesh_->triangle(start).active) {
    const auto active = mesh_->active_triangles();
    if (active.empty()) return kNone;
    start = active.front();
  }
  TriId t = walk(p, start);
  if (t == kNone) t = scan(p);
  if (t == kNone) return kNone;
  last_ = t;
  return smallest_containing(p, t);
}

DataBuckets locate(const TriMesh& mesh, const ScatteredData& data) {
  DataBuckets b;
  b.owner.assign(data.points.size(), kNone);
  b.members.assign(static_cast<std::size_t>(mesh.triangle_capacity()), {});
  Locator locator(mesh);
  for (int i = 0; i < data.size(); ++i) {
    const TriId t = locator.locate(data.points[i]);
    b.owner[i] = t;
    if (t == kNone) {
      b.outside.push_back(i);
    } else {
      b.members[t].push_back(i);
    }
  }
  return b;
}

void rebucket(const TriMesh& mesh, const ScatteredData& data, const RefinementDelta& delta, DataBuckets& buckets) {
  buckets.members.resize(static_cast<std::size_t>(mesh.triangle_capacity()));
  std::vector<TriId> touched;
  for (TriId t : delta.removed_triangles) {
    if (buckets.members[t].empty()) continue;
    std::vector<int> moving;
    moving.swap(buckets.members[t]);
    for (int i : moving) {
      const Point& p = data.points[i];
      TriId cur = t;
      while (!mesh.triangle(cur).active) {
        const auto& ch = mesh.triangle(cur).children;
        TriId pick = kNone;
        for (TriId c : ch) {
          if (triangle_contains(mesh, c, p)) {
            pick = c;
            break;
          }
        }
        if (pick == kNone) {
          // Round-off on the split line: take the child the point is least outside of.
          double best = -std::numeric_limits<double>::infinity();
          for (TriId c : ch) {
            const auto& v = mesh.triangle(c).nodes;
            const double m = barycentric<double>(mesh.node(v[0]), mesh.node(v[1]), mesh.node(v[2]), p).minCoeff();
            if (m > best) {
              best = m;
              pick = c;
            }
          }
        }
        cur = pick;
      }
      buckets.owner[i] = cur;
      buckets.members[cur].push_back(i);
      touched.push_back(cur);
    }
  }
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  for (TriId t : touched) std::sort(buckets.members[t].begin(), buckets.members[t].end());
}

double max_data_gap(const ScatteredData& data, const DomainSpec& domain, double resolution) {
  if (data.size() == 0) throw EmptyDataError("max_data_gap needs at least one data point");
  if (!(resolution > 0)) throw ConfigError("probe resolution must be positive");
  PointGrid grid(data.points);
  const int nx = static_cast<int>(std::ceil(domain.box.width() / resolution));
  const int ny = static_cast<int>(std::ceil(domain.box.height() / resolution));
  double gap = 0.0;
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const Point p(std::min(domain.box.x_lo + i * resolution, domain.box.x_hi),
                    std::min(domain.box.y_lo + j * resolution, domain.box.y_hi));
      if (!domain.contains(p)) continue;
      gap = std::max(gap, grid.nearest(p).second);
    }
  }
  return gap;
}

Vector BasisSamples::evaluate(const Vector& c) const {
  Vector out(size());
  for (int i = 0; i < size(); ++i) {
    out[i] = weights(i, 0) * c[nodes(i, 0)] + weights(i, 1) * c[nodes(i, 1)] + weights(i, 2) * c[nodes(i, 2)];
  }
  return out;
}

Vector BasisSamples::project(const Vector& z, int m) const {
  Vector out = Vector::Zero(m);
  const double inv_n = 1.0 / size();
  for (int i = 0; i < size(); ++i) {
    for (int k = 0; k < 3; ++k) out[nodes(i, k)] += inv_n * weights(i, k) * z[i];
  }
  return out;
}

BasisSamples basis_samples(const TriMesh& mesh, const ScatteredData& data, const DataBuckets& buckets) {
  BasisSamples s;
  const int n = data.size();
  s.nodes.resize(n, 3);
  s.weights.resize(n, 3);
  for (int i = 0; i < n; ++i) {
    const TriId t = buckets.owner[i];
    if (t == kNone) throw ContractViolation("basis_samples: point " + std::to_string(i) + " is not located");
    if (!mesh.triangle(t).active) {
      throw ContractViolation("basis_samples: point " + std::to_string(i) + " references a retired triangle");
    }
    const auto& v = mesh.triangle(t).nodes;
    const Eigen::Vector3d l = barycentric<double>(mesh.node(v[0]), mesh.node(v[1]), mesh.node(v[2]), data.points[i]);
    for (int k = 0; k < 3; ++k) {
      s.nodes(i, k) = v[k];
      s.weights(i, k) = l[k];
    }
  }
  return s;
}

}  // namespace tpsfem
