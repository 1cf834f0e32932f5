#include <bilopt/quadrature.hpp>

#include <array>
#include <cmath>

namespace bilopt {

namespace {

constexpr std::array<QuadPoint, 3> kOrder2 = {{
    {2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0},
    {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0},
    {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0, 1.0 / 3.0},
}};

// Dunavant degree-4 rule.
constexpr double kA = 0.445948490915965;
constexpr double kWA = 0.223381589678011;
constexpr double kB = 0.091576213509771;
constexpr double kWB = 0.109951743655322;
constexpr std::array<QuadPoint, 6> kOrder4 = {{
    {1 - 2 * kA, kA, kA, kWA},
    {kA, 1 - 2 * kA, kA, kWA},
    {kA, kA, 1 - 2 * kA, kWA},
    {1 - 2 * kB, kB, kB, kWB},
    {kB, 1 - 2 * kB, kB, kWB},
    {kB, kB, 1 - 2 * kB, kWB},
}};

}  // namespace

std::span<const QuadPoint> triangle_rule_order2() { return kOrder2; }
std::span<const QuadPoint> triangle_rule_order4() { return kOrder4; }

Point map_barycentric(const Triangle& t, const QuadPoint& q) {
  return q.l0 * t[0] + q.l1 * t[1] + q.l2 * t[2];
}

double integrate(const ScalarFn& f, const Triangle& t, std::span<const QuadPoint> rule) {
  const double area = triangle_area(t);
  double sum = 0.0;
  for (const QuadPoint& q : rule) sum += q.weight * f(map_barycentric(t, q));
  return area * sum;
}

std::vector<Triangle> split_by_lines(const Triangle& t, std::span<const Line> lines) {
  std::vector<Polygon> pieces{{t[0], t[1], t[2]}};
  for (const Line& line : lines) {
    std::vector<Polygon> next;
    for (const Polygon& p : pieces) {
      Polygon below = clip_below(p, line);
      Polygon above = clip_above(p, line);
      if (polygon_area(below) > 0 && polygon_area(above) > 0) {
        next.push_back(std::move(below));
        next.push_back(std::move(above));
      } else {
        next.push_back(p);
      }
    }
    pieces = std::move(next);
  }
  std::vector<Triangle> out;
  if (pieces.size() == 1) {
    out.push_back(t);
    return out;
  }
  for (const Polygon& p : pieces) {
    for (const Triangle& s : fan_triangulate(p)) out.push_back(s);
  }
  return out;
}

double integrate_split(const ScalarFn& f, const Triangle& t, std::span<const Line> lines,
                       std::span<const QuadPoint> rule) {
  bool crossed = false;
  for (const Line& line : lines) {
    if (line_crosses(t, line)) {
      crossed = true;
      break;
    }
  }
  if (!crossed) return integrate(f, t, rule);
  double sum = 0.0;
  for (const Triangle& s : split_by_lines(t, lines)) sum += integrate(f, s, rule);
  return sum;
}

}  // namespace bilopt
