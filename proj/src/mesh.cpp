#include <bilopt/mesh.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

namespace bilopt {

namespace {

constexpr double kCoordTol = 1e-12;

void finalize(Mesh& mesh) {
  const int ne = mesh.element_count();
  mesh.element_areas.resize(ne);
  mesh.h = 0.0;
  for (int t = 0; t < ne; ++t) {
    const Triangle tri = mesh.triangle(t);
    const double area = triangle_area(tri);
    if (area <= 0) throw std::runtime_error("mesh: nonpositive element area");
    mesh.element_areas[t] = area;
    mesh.h = std::max(mesh.h, triangle_diameter(tri));
  }
  const int nn = mesh.node_count();
  mesh.boundary_flag.assign(nn, false);
  mesh.boundary_nodes.clear();
  const Rect& d = mesh.domain;
  const double tol = kCoordTol * std::max({1.0, d.width(), d.height()});
  for (int i = 0; i < nn; ++i) {
    const double x = mesh.nodes(i, 0), y = mesh.nodes(i, 1);
    const bool onb = std::abs(x - d.x_min) <= tol || std::abs(x - d.x_max) <= tol ||
                     std::abs(y - d.y_min) <= tol || std::abs(y - d.y_max) <= tol;
    mesh.boundary_flag[i] = onb;
    if (onb) mesh.boundary_nodes.push_back(i);
  }
}

}  // namespace

Mesh build_uniform_mesh(int n, const Rect& domain) {
  if (n < 1) throw std::invalid_argument("build_uniform_mesh: need n >= 1");
  Mesh mesh;
  mesh.domain = domain;
  mesh.subdivisions = n;
  const int nn = (n + 1) * (n + 1);
  mesh.nodes.resize(nn, 2);
  const double dx = domain.width() / n, dy = domain.height() / n;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      const int id = j * (n + 1) + i;
      mesh.nodes(id, 0) = domain.x_min + i * dx;
      mesh.nodes(id, 1) = domain.y_min + j * dy;
    }
  mesh.elements.resize(2 * n * n, 3);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int bl = j * (n + 1) + i;
      const int br = bl + 1;
      const int tl = bl + (n + 1);
      const int tr = tl + 1;
      const int e = 2 * (j * n + i);
      mesh.elements.row(e) << bl, br, tr;      // below the cell diagonal
      mesh.elements.row(e + 1) << bl, tr, tl;  // above
    }
  finalize(mesh);
  return mesh;
}

Mesh refine_uniform(const Mesh& mesh) {
  Mesh fine;
  fine.domain = mesh.domain;
  fine.subdivisions = 0;  // numbering is not the canonical one
  const int nn = mesh.node_count();
  std::vector<Point> nodes;
  nodes.reserve(nn * 4);
  for (int i = 0; i < nn; ++i) nodes.push_back(mesh.nodes.row(i).transpose());

  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const int id = static_cast<int>(nodes.size());
    nodes.push_back(0.5 * (nodes[a] + nodes[b]));
    midpoint.emplace(key, id);
    return id;
  };

  fine.elements.resize(4 * mesh.element_count(), 3);
  for (int t = 0; t < mesh.element_count(); ++t) {
    const int v0 = mesh.elements(t, 0), v1 = mesh.elements(t, 1), v2 = mesh.elements(t, 2);
    const int m01 = mid(v0, v1), m12 = mid(v1, v2), m02 = mid(v0, v2);
    fine.elements.row(4 * t + 0) << v0, m01, m02;
    fine.elements.row(4 * t + 1) << m01, v1, m12;
    fine.elements.row(4 * t + 2) << m02, m12, v2;
    fine.elements.row(4 * t + 3) << m01, m12, m02;
  }
  fine.nodes.resize(static_cast<int>(nodes.size()), 2);
  for (std::size_t i = 0; i < nodes.size(); ++i) fine.nodes.row(i) = nodes[i].transpose();
  finalize(fine);
  return fine;
}

double shape_ratio(const Mesh& mesh) {
  double min_inradius = std::numeric_limits<double>::max();
  for (int t = 0; t < mesh.element_count(); ++t)
    min_inradius = std::min(min_inradius, triangle_inradius(mesh.triangle(t)));
  return mesh.h / min_inradius;
}

int locate_element(const Mesh& mesh, const Point& p) {
  const int n = mesh.subdivisions;
  if (n <= 0) throw std::logic_error("locate_element: mesh is not canonically structured");
  const Rect& d = mesh.domain;
  const double fx = (p.x() - d.x_min) / d.width() * n;
  const double fy = (p.y() - d.y_min) / d.height() * n;
  const int i = std::clamp(static_cast<int>(std::floor(fx)), 0, n - 1);
  const int j = std::clamp(static_cast<int>(std::floor(fy)), 0, n - 1);
  const bool below_diagonal = (fx - i) >= (fy - j);
  return 2 * (j * n + i) + (below_diagonal ? 0 : 1);
}

double ControlRegion::covered_area() const {
  double a = 0.0;
  for (int t : element_ids) a += mesh->element_areas[t];
  return a;
}

ControlRegion extract_control_region(const Mesh& mesh, const Rect& omega) {
  if (!omega.strictly_inside(mesh.domain))
    throw std::invalid_argument(
        "extract_control_region: closure of the control rectangle must lie inside the open "
        "domain");
  ControlRegion region;
  region.mesh = &mesh;
  region.box = omega;
  for (int t = 0; t < mesh.element_count(); ++t) {
    const Triangle tri = mesh.triangle(t);
    bool inside = omega.contains(triangle_barycenter(tri), kCoordTol);
    for (int v = 0; v < 3 && inside; ++v) inside = omega.contains(tri[v], kCoordTol);
    if (inside) region.element_ids.push_back(t);
  }
  region.uncovered_measure = omega.area() - region.covered_area();
  if (region.uncovered_measure < 0 && region.uncovered_measure > -1e-12)
    region.uncovered_measure = 0.0;
  return region;
}

}  // namespace bilopt
