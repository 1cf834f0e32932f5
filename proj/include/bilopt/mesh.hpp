#pragma once

#include <bilopt/geometry.hpp>
#include <bilopt/types.hpp>

#include <vector>

namespace bilopt {

/// Conforming triangulation of an axis-aligned rectangle.  Immutable after
/// construction; all operations on meshes are pure.
struct Mesh {
  Eigen::Matrix<double, Eigen::Dynamic, 2> nodes;
  Eigen::Matrix<int, Eigen::Dynamic, 3> elements;  // counterclockwise node triples
  std::vector<int> boundary_nodes;
  std::vector<bool> boundary_flag;
  Vector element_areas;
  double h = 0.0;  // max element diameter
  Rect domain;
  /// Subdivisions per side for meshes produced by build_uniform_mesh, whose
  /// node/element numbering is the canonical row-major one (enables O(1)
  /// point location and nested transfer).  0 for other meshes.
  int subdivisions = 0;

  int node_count() const { return static_cast<int>(nodes.rows()); }
  int element_count() const { return static_cast<int>(elements.rows()); }
  Triangle triangle(int t) const {
    return {nodes.row(elements(t, 0)).transpose(), nodes.row(elements(t, 1)).transpose(),
            nodes.row(elements(t, 2)).transpose()};
  }
  Point barycenter(int t) const { return triangle_barycenter(triangle(t)); }
  double total_area() const { return element_areas.sum(); }
};

/// Structured triangulation of `domain` with n x n cells, each split along the
/// bottom-left-to-top-right diagonal: 2 n^2 elements, (n+1)^2 nodes.
Mesh build_uniform_mesh(int n, const Rect& domain = {});

/// Red refinement: every triangle split into 4 congruent children; h halves and
/// the parent nodes are kept (with their indices) as a prefix of the new nodes.
Mesh refine_uniform(const Mesh& mesh);

/// max element diameter / min element inradius.
double shape_ratio(const Mesh& mesh);

/// Element index containing p, for canonical structured meshes only.
int locate_element(const Mesh& mesh, const Point& p);

/// Control sub-triangulation: the elements contained in the closure of an
/// axis-aligned rectangle omega with closure(omega) inside the open domain.
struct ControlRegion {
  const Mesh* mesh = nullptr;
  Rect box;
  std::vector<int> element_ids;
  double uncovered_measure = 0.0;  // |omega \ omega_h|

  int count() const { return static_cast<int>(element_ids.size()); }
  double covered_area() const;
};

ControlRegion extract_control_region(const Mesh& mesh, const Rect& omega);

}  // namespace bilopt
