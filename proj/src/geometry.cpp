#include <bilopt/geometry.hpp>

#include <algorithm>
#include <cmath>

namespace bilopt {

double triangle_area(const Triangle& t) {
  const Point a = t[1] - t[0], b = t[2] - t[0];
  return 0.5 * (a.x() * b.y() - a.y() * b.x());
}

double polygon_area(const Polygon& p) {
  if (p.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Point& u = p[i];
    const Point& v = p[(i + 1) % p.size()];
    twice += u.x() * v.y() - u.y() * v.x();
  }
  return 0.5 * twice;
}

Point triangle_barycenter(const Triangle& t) { return (t[0] + t[1] + t[2]) / 3.0; }

double triangle_diameter(const Triangle& t) {
  double d = 0.0;
  for (int i = 0; i < 3; ++i) d = std::max(d, (t[i] - t[(i + 1) % 3]).norm());
  return d;
}

double triangle_inradius(const Triangle& t) {
  const double a = (t[1] - t[2]).norm();
  const double b = (t[2] - t[0]).norm();
  const double c = (t[0] - t[1]).norm();
  const double s = 0.5 * (a + b + c);
  return s > 0 ? triangle_area(t) / s : 0.0;
}

namespace {

Polygon clip_half_plane(const Polygon& poly, const Line& line, double sign) {
  Polygon out;
  const std::size_t n = poly.size();
  if (n == 0) return out;
  out.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const Point& cur = poly[i];
    const Point& nxt = poly[(i + 1) % n];
    const double dc = sign * line.signed_distance(cur);
    const double dn = sign * line.signed_distance(nxt);
    if (dc <= 0) out.push_back(cur);
    if ((dc < 0 && dn > 0) || (dc > 0 && dn < 0)) {
      const double s = dc / (dc - dn);
      out.push_back(cur + s * (nxt - cur));
    }
  }
  return out;
}

}  // namespace

Polygon clip_below(const Polygon& poly, const Line& line) {
  return clip_half_plane(poly, line, 1.0);
}

Polygon clip_above(const Polygon& poly, const Line& line) {
  return clip_half_plane(poly, line, -1.0);
}

std::vector<Triangle> fan_triangulate(const Polygon& poly) {
  std::vector<Triangle> out;
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
    Triangle t{poly[0], poly[i], poly[i + 1]};
    if (std::abs(triangle_area(t)) > 0) out.push_back(t);
  }
  return out;
}

bool line_crosses(const Triangle& t, const Line& line, double tol) {
  double lo = 0, hi = 0;
  for (const Point& v : t) {
    const double d = line.signed_distance(v);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  return lo < -tol && hi > tol;
}

double area_below(const Triangle& t, const Line& line) {
  const Polygon clipped = clip_below({t[0], t[1], t[2]}, line);
  return polygon_area(clipped);
}

}  // namespace bilopt
