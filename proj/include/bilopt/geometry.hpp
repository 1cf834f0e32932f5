#pragma once

#include <bilopt/types.hpp>

#include <array>
#include <vector>

namespace bilopt {

/// Triangle given by its three vertices, counterclockwise.
using Triangle = std::array<Point, 3>;

/// Convex polygon, counterclockwise vertex list.
using Polygon = std::vector<Point>;

double triangle_area(const Triangle& t);
double polygon_area(const Polygon& p);
Point triangle_barycenter(const Triangle& t);
double triangle_diameter(const Triangle& t);
double triangle_inradius(const Triangle& t);

/// Part of `poly` with signed_distance <= 0 (Sutherland-Hodgman against one half-plane).
Polygon clip_below(const Polygon& poly, const Line& line);
/// Part of `poly` with signed_distance >= 0.
Polygon clip_above(const Polygon& poly, const Line& line);

/// Fan triangulation of a convex polygon; empty for degenerate inputs.
std::vector<Triangle> fan_triangulate(const Polygon& poly);

/// Does the open line cross the triangle interior (vertices strictly on both sides)?
bool line_crosses(const Triangle& t, const Line& line, double tol = 1e-14);

/// Area of the part of `t` with signed distance to `line` <= 0.
double area_below(const Triangle& t, const Line& line);

}  // namespace bilopt
