#include <bilopt/assembly.hpp>
#include <bilopt/fields.hpp>
#include <bilopt/quadrature.hpp>

#include <cmath>
#include <stdexcept>

namespace bilopt {

ControlField constant_control(const ControlRegion& region, double value) {
  ControlField u;
  u.region = &region;
  u.values = Vector::Constant(region.count(), value);
  return u;
}

double interpolate_in_element(const Mesh& mesh, const Vector& nodal, int t, const Point& p) {
  const Triangle tri = mesh.triangle(t);
  const double area = mesh.element_areas[t];
  const auto g = hat_gradients(tri, area);
  double value = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double hat = 1.0 + g.col(i).dot(p - tri[i]);
    value += hat * nodal[mesh.elements(t, i)];
  }
  return value;
}

double l2_error(const Mesh& mesh, const Vector& nodal, const ScalarFn& exact,
                std::span<const Line> lines) {
  const auto rule = triangle_rule_order4();
  double sum = 0.0;
  for (int t = 0; t < mesh.element_count(); ++t) {
    const Triangle tri = mesh.triangle(t);
    const auto g = hat_gradients(tri, mesh.element_areas[t]);
    const int n[3] = {mesh.elements(t, 0), mesh.elements(t, 1), mesh.elements(t, 2)};
    auto diff_sq = [&](const Point& x) {
      double v = 0.0;
      for (int i = 0; i < 3; ++i) v += (1.0 + g.col(i).dot(x - tri[i])) * nodal[n[i]];
      const double d = v - exact(x);
      return d * d;
    };
    sum += integrate_split(diff_sq, tri, lines, rule);
  }
  return std::sqrt(sum);
}

double linf_error(const Mesh& mesh, const Vector& nodal, const ScalarFn& exact) {
  const auto rule = triangle_rule_order4();
  double worst = 0.0;
  for (int t = 0; t < mesh.element_count(); ++t) {
    const Triangle tri = mesh.triangle(t);
    for (int i = 0; i < 3; ++i)
      worst = std::max(worst, std::abs(nodal[mesh.elements(t, i)] - exact(tri[i])));
    for (const QuadPoint& q : rule) {
      const Point x = map_barycentric(tri, q);
      worst = std::max(worst, std::abs(interpolate_in_element(mesh, nodal, t, x) - exact(x)));
    }
    const Point c = triangle_barycenter(tri);
    worst = std::max(worst, std::abs(interpolate_in_element(mesh, nodal, t, c) - exact(c)));
  }
  return worst;
}

double l1_norm(const ControlField& u) {
  const ControlRegion& region = *u.region;
  double sum = 0.0;
  for (int k = 0; k < region.count(); ++k)
    sum += region.mesh->element_areas[region.element_ids[k]] * std::abs(u.values[k]);
  return sum;
}

double lq_norm(const ControlField& u, double q) {
  const ControlRegion& region = *u.region;
  double sum = 0.0;
  for (int k = 0; k < region.count(); ++k)
    sum += region.mesh->element_areas[region.element_ids[k]] *
           std::pow(std::abs(u.values[k]), q);
  return std::pow(sum, 1.0 / q);
}

double control_inner(const ControlField& a, const ControlField& b) {
  if (a.region != b.region)
    throw std::invalid_argument("control_inner: fields on different regions");
  const ControlRegion& region = *a.region;
  double sum = 0.0;
  for (int k = 0; k < region.count(); ++k)
    sum += region.mesh->element_areas[region.element_ids[k]] * a.values[k] * b.values[k];
  return sum;
}

}  // namespace bilopt
