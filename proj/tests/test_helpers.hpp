#pragma once

#include <bilopt/geometry.hpp>
#include <bilopt/mesh.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

// Test-side oracles, independent of the library's clipping/quadrature paths.
namespace oracle {

// Area of triangle strictly left of the vertical line x = c, by 1D slab
// integration of the width function over y (piecewise linear between
// breakpoints), not by polygon clipping.
inline double area_left_of_vertical(const bilopt::Triangle& t, double c) {
  // width of {x < c} inside the triangle at height y
  auto width = [&](double y) {
    // intersect the horizontal line at y with the triangle edges
    std::vector<double> xs;
    for (int i = 0; i < 3; ++i) {
      const bilopt::Point a = t[i], b = t[(i + 1) % 3];
      if ((a.y() <= y && b.y() >= y) || (b.y() <= y && a.y() >= y)) {
        if (a.y() == b.y()) {
          xs.push_back(a.x());
          xs.push_back(b.x());
        } else {
          const double s = (y - a.y()) / (b.y() - a.y());
          if (s >= 0 && s <= 1) xs.push_back(a.x() + s * (b.x() - a.x()));
        }
      }
    }
    if (xs.size() < 2) return 0.0;
    const double lo = *std::min_element(xs.begin(), xs.end());
    const double hi = *std::max_element(xs.begin(), xs.end());
    return std::max(0.0, std::min(hi, c) - lo);
  };
  // breakpoints: vertex heights plus heights where edges cross x = c
  std::vector<double> ys{t[0].y(), t[1].y(), t[2].y()};
  for (int i = 0; i < 3; ++i) {
    const bilopt::Point a = t[i], b = t[(i + 1) % 3];
    if ((a.x() - c) * (b.x() - c) < 0) {
      const double s = (c - a.x()) / (b.x() - a.x());
      ys.push_back(a.y() + s * (b.y() - a.y()));
    }
  }
  std::sort(ys.begin(), ys.end());
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < ys.size(); ++i) {
    const double y0 = ys[i], y1 = ys[i + 1];
    if (y1 - y0 <= 0) continue;
    // width is linear on each panel: trapezoid is exact
    area += 0.5 * (width(y0 + 1e-14 * (y1 - y0)) + width(y1 - 1e-14 * (y1 - y0))) * (y1 - y0);
  }
  return area;
}

// Area of the intersection of a triangle with an axis-aligned rectangle, by
// two nested slab integrations (again no polygon clipping).
inline double area_in_rect(const bilopt::Triangle& t, const bilopt::Rect& r) {
  auto width = [&](double y) {
    std::vector<double> xs;
    for (int i = 0; i < 3; ++i) {
      const bilopt::Point a = t[i], b = t[(i + 1) % 3];
      if ((a.y() <= y && b.y() >= y) || (b.y() <= y && a.y() >= y)) {
        if (a.y() == b.y()) {
          xs.push_back(a.x());
          xs.push_back(b.x());
        } else {
          const double s = (y - a.y()) / (b.y() - a.y());
          if (s >= 0 && s <= 1) xs.push_back(a.x() + s * (b.x() - a.x()));
        }
      }
    }
    if (xs.size() < 2) return 0.0;
    const double lo = std::max(*std::min_element(xs.begin(), xs.end()), r.x_min);
    const double hi = std::min(*std::max_element(xs.begin(), xs.end()), r.x_max);
    return std::max(0.0, hi - lo);
  };
  std::vector<double> ys{t[0].y(), t[1].y(), t[2].y(), r.y_min, r.y_max};
  for (int i = 0; i < 3; ++i) {
    for (double c : {r.x_min, r.x_max}) {
      const bilopt::Point a = t[i], b = t[(i + 1) % 3];
      if ((a.x() - c) * (b.x() - c) < 0) {
        const double s = (c - a.x()) / (b.x() - a.x());
        ys.push_back(a.y() + s * (b.y() - a.y()));
      }
    }
  }
  const double ylo = std::max(std::min({t[0].y(), t[1].y(), t[2].y()}), r.y_min);
  const double yhi = std::min(std::max({t[0].y(), t[1].y(), t[2].y()}), r.y_max);
  std::sort(ys.begin(), ys.end());
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < ys.size(); ++i) {
    const double y0 = std::max(ys[i], ylo), y1 = std::min(ys[i + 1], yhi);
    if (y1 - y0 <= 0) continue;
    area += 0.5 * (width(y0 + 1e-13 * (y1 - y0)) + width(y1 - 1e-13 * (y1 - y0))) * (y1 - y0);
  }
  return area;
}

// Canonical form of a mesh for connectivity comparison: nodes sorted
// lexicographically, elements renumbered, rotated to start at the smallest
// node id, then sorted.
struct CanonicalMesh {
  std::vector<std::array<double, 2>> nodes;
  std::vector<std::array<int, 3>> elements;
};

inline CanonicalMesh canonicalize(const bilopt::Mesh& mesh) {
  CanonicalMesh out;
  std::vector<int> order(mesh.node_count());
  for (int i = 0; i < mesh.node_count(); ++i) order[i] = i;
  auto key = [&](int i) {
    return std::array<double, 2>{mesh.nodes(i, 0), mesh.nodes(i, 1)};
  };
  std::sort(order.begin(), order.end(), [&](int a, int b) { return key(a) < key(b); });
  std::vector<int> rank(mesh.node_count());
  for (int i = 0; i < mesh.node_count(); ++i) rank[order[i]] = i;
  for (int i = 0; i < mesh.node_count(); ++i) out.nodes.push_back(key(order[i]));
  for (int t = 0; t < mesh.element_count(); ++t) {
    std::array<int, 3> e{rank[mesh.elements(t, 0)], rank[mesh.elements(t, 1)],
                         rank[mesh.elements(t, 2)]};
    int lo = 0;
    for (int i = 1; i < 3; ++i)
      if (e[i] < e[lo]) lo = i;
    std::array<int, 3> rot{e[lo], e[(lo + 1) % 3], e[(lo + 2) % 3]};
    out.elements.push_back(rot);
  }
  std::sort(out.elements.begin(), out.elements.end());
  return out;
}

// Every edge is shared by at most two elements, interior edges by exactly two.
inline bool conforming(const bilopt::Mesh& mesh) {
  std::map<std::pair<int, int>, int> edges;
  for (int t = 0; t < mesh.element_count(); ++t)
    for (int i = 0; i < 3; ++i) {
      const int a = mesh.elements(t, i), b = mesh.elements(t, (i + 1) % 3);
      ++edges[std::minmax(a, b)];
    }
  for (const auto& [edge, count] : edges) {
    if (count > 2) return false;
    if (count == 1 && !(mesh.boundary_flag[edge.first] && mesh.boundary_flag[edge.second]))
      return false;
  }
  return true;
}

inline double min_angle(const bilopt::Mesh& mesh) {
  double worst = M_PI;
  for (int t = 0; t < mesh.element_count(); ++t) {
    const bilopt::Triangle tri = mesh.triangle(t);
    for (int i = 0; i < 3; ++i) {
      const bilopt::Point a = (tri[(i + 1) % 3] - tri[i]).normalized();
      const bilopt::Point b = (tri[(i + 2) % 3] - tri[i]).normalized();
      worst = std::min(worst, std::acos(std::clamp(a.dot(b), -1.0, 1.0)));
    }
  }
  return worst;
}

}  // namespace oracle
