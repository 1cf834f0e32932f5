#include <bilopt/problems.hpp>

#include <cmath>
#include <stdexcept>

namespace bilopt {

ManufacturedProblem make_manufactured_problem(ManufacturedKind kind, double amplitude,
                                              double lower, double upper) {
  if (amplitude == 0.0)
    throw std::invalid_argument(
        "make_manufactured_problem: amplitude 0 makes the density vanish identically");
  if (!(lower >= 0.0 && lower < upper))
    throw std::invalid_argument("make_manufactured_problem: need 0 <= lower < upper");

  const double c = amplitude;
  const Rect omega{0.25, 0.25, 0.75, 0.75};

  auto ybar = [](const Point& p) { return std::sin(M_PI * p.x()) * std::sin(M_PI * p.y()); };
  auto phibar = [c](const Point& p) {
    return c * std::sin(M_PI * p.x()) * std::sin(M_PI * p.y()) * (p.x() - 0.5);
  };
  auto psibar = [c](const Point& p) {
    const double s1 = std::sin(M_PI * p.x()), s2 = std::sin(M_PI * p.y());
    return -c * s1 * s1 * s2 * s2 * (p.x() - 0.5);
  };
  // c > 0: density positive left of the switch, so the control sits at the
  // lower bound there; mirrored for c < 0.
  auto ubar = [c, lower, upper](const Point& p) {
    const bool left = p.x() < 0.5;
    return (c > 0) == left ? lower : upper;
  };
  auto chi_omega = [omega](const Point& p) { return omega.contains(p) ? 1.0 : 0.0; };

  Nonlinearity b = kind == ManufacturedKind::Cubic ? cubic_nonlinearity() : zero_nonlinearity();

  // laplace_phibar = -2 pi^2 phibar + 2 pi c cos(pi x1) sin(pi x2)
  auto laplace_phibar = [c, phibar](const Point& p) {
    return -2.0 * M_PI * M_PI * phibar(p) +
           2.0 * M_PI * c * std::cos(M_PI * p.x()) * std::sin(M_PI * p.y());
  };

  ManufacturedProblem mp;
  mp.kind = kind;
  mp.amplitude = amplitude;
  mp.state_exact = ybar;
  mp.adjoint_exact = phibar;
  mp.density_exact = psibar;
  mp.control_exact = ubar;
  mp.switch_line = Line::vertical(0.5);

  ProblemSpec& spec = mp.spec;
  spec.control_box = omega;
  spec.lower_bound = lower;
  spec.upper_bound = upper;
  spec.semilinear = b;
  spec.source = [ybar, b, chi_omega, ubar](const Point& p) {
    const double y = ybar(p);
    return 2.0 * M_PI * M_PI * y + b.value(p, y) + chi_omega(p) * ubar(p) * y;
  };
  spec.target = [ybar, phibar, laplace_phibar, b, chi_omega, ubar](const Point& p) {
    const double y = ybar(p);
    const double phi = phibar(p);
    return y + laplace_phibar(p) - b.deriv(p, y) * phi - chi_omega(p) * ubar(p) * phi;
  };
  spec.jump_lines = {Line::vertical(0.5), Line::vertical(omega.x_min),
                     Line::vertical(omega.x_max), Line::horizontal(omega.y_min),
                     Line::horizontal(omega.y_max)};
  return mp;
}

double control_error_l1(const ManufacturedProblem& mp, const ControlField& u) {
  const ControlRegion& region = *u.region;
  const Mesh& mesh = *region.mesh;
  const double lo = mp.spec.lower_bound, hi = mp.spec.upper_bound;
  const bool lower_left = mp.amplitude > 0;
  double err = 0.0;
  for (int k = 0; k < region.count(); ++k) {
    const int t = region.element_ids[k];
    const Triangle tri = mesh.triangle(t);
    const double area = mesh.element_areas[t];
    const double left = area_below(tri, mp.switch_line);
    const double right = area - left;
    const double u_left = lower_left ? lo : hi;
    const double u_right = lower_left ? hi : lo;
    err += left * std::abs(u.values[k] - u_left) + right * std::abs(u.values[k] - u_right);
  }
  return err;
}

ControlField exact_control_field(const ManufacturedProblem& mp, const ControlRegion& region) {
  const Line lines[] = {mp.switch_line};
  return project_cell_averages(mp.control_exact, region, lines);
}

double density_max(const ManufacturedProblem& mp) {
  // separable: max over x2 of sin^2 is at 1/2 (value 1); 1D scan + refine in x1
  auto g = [](double x1) {
    const double s = std::sin(M_PI * x1);
    return s * s * std::abs(x1 - 0.5);
  };
  double best_x = 0.5, best = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double x = 0.25 + 0.5 * i / 2000.0;
    if (g(x) > best) {
      best = g(x);
      best_x = x;
    }
  }
  double lo = std::max(0.25, best_x - 1e-3), hi = std::min(0.75, best_x + 1e-3);
  for (int it = 0; it < 200; ++it) {  // golden-section refinement
    const double m1 = lo + 0.381966011250105 * (hi - lo);
    const double m2 = hi - 0.381966011250105 * (hi - lo);
    if (g(m1) < g(m2))
      lo = m1;
    else
      hi = m2;
  }
  return std::abs(mp.amplitude) * g(0.5 * (lo + hi));
}

}  // namespace bilopt
