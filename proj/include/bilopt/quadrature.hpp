#pragma once

#include <bilopt/geometry.hpp>
#include <bilopt/types.hpp>

#include <span>
#include <vector>

namespace bilopt {

/// Quadrature point in barycentric coordinates with weight (weights sum to 1).
struct QuadPoint {
  double l0, l1, l2;
  double weight;
};

/// 3-point Gauss rule, exact for polynomials of degree 2.
std::span<const QuadPoint> triangle_rule_order2();

/// 6-point rule, exact for polynomials of degree 4.
std::span<const QuadPoint> triangle_rule_order4();

Point map_barycentric(const Triangle& t, const QuadPoint& q);

/// Integral of f over the triangle with the given rule.
double integrate(const ScalarFn& f, const Triangle& t, std::span<const QuadPoint> rule);

/// Integral of f over the triangle, splitting along every line that crosses it.
/// Crossed triangles are clipped into convex pieces, fan-triangulated, and the
/// rule is applied per sub-triangle, so integrands that are smooth on each side
/// of the lines (in particular piecewise constants) are integrated at the
/// rule's full order.
double integrate_split(const ScalarFn& f, const Triangle& t, std::span<const Line> lines,
                       std::span<const QuadPoint> rule);

/// Sub-triangles after splitting t by all crossing lines (t itself if none cross).
std::vector<Triangle> split_by_lines(const Triangle& t, std::span<const Line> lines);

}  // namespace bilopt
