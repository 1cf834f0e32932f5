#include <bilopt/analysis.hpp>
#include <bilopt/quadrature.hpp>

#include <algorithm>
#include <cmath>
#include <future>
#include <random>
#include <stdexcept>

namespace bilopt {

double halton(long index, int base) {
  double f = 1.0, r = 0.0;
  for (long i = index + 1; i > 0; i /= base) {
    f /= base;
    r += f * (i % base);
  }
  return r;
}

std::vector<double> default_eps_grid(double density_max) {
  std::vector<double> grid;
  for (int k = 8; k >= 3; --k) grid.push_back(std::ldexp(density_max, -k));
  return grid;
}

StructureEstimate estimate_structure_constant(const ScalarFn& density, const Rect& omega,
                                              std::span<const double> eps_grid,
                                              long n_samples) {
  for (std::size_t i = 0; i + 1 < eps_grid.size(); ++i)
    if (!(eps_grid[i] > 0) || eps_grid[i + 1] <= eps_grid[i])
      throw std::invalid_argument("estimate_structure_constant: grid must be positive increasing");

  StructureEstimate est;
  est.eps_grid.assign(eps_grid.begin(), eps_grid.end());
  std::vector<long> counts(eps_grid.size(), 0);
  long zero_count = 0;
  double scale = 0.0;
  std::vector<double> samples;
  samples.reserve(n_samples);
  for (long i = 0; i < n_samples; ++i) {
    const Point p{omega.x_min + omega.width() * halton(i, 2),
                  omega.y_min + omega.height() * halton(i, 3)};
    const double v = std::abs(density(p));
    samples.push_back(v);
    scale = std::max(scale, v);
  }
  for (double v : samples) {
    if (v <= 1e-12 * std::max(scale, 1e-300)) ++zero_count;
    for (std::size_t j = 0; j < eps_grid.size(); ++j)
      if (v <= eps_grid[j]) ++counts[j];
  }
  const double area = omega.area();
  est.degenerate = zero_count >= 10;
  for (std::size_t j = 0; j < eps_grid.size(); ++j) {
    const double p = static_cast<double>(counts[j]) / n_samples;
    est.measures.push_back(area * p);
    est.ratios.push_back(area * p / eps_grid[j]);
    est.std_errors.push_back(area * std::sqrt(std::max(p * (1 - p), 0.0) / n_samples));
  }
  est.K = est.degenerate ? std::numeric_limits<double>::infinity()
                         : *std::max_element(est.ratios.begin(), est.ratios.end());
  return est;
}

namespace {

// |density| along a slice of the manufactured problem in symmetric form:
// |psi(1/2 +- d, x2)| = |c| sin^2(pi x2) g(d), g(d) = cos^2(pi d) d on [0, 1/4].
double slice_profile(double d) {
  const double c = std::cos(M_PI * d);
  return c * c * d;
}

double slice_profile_argmax() {
  double a = 0.0, b = 0.25;
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (a + b);
    const double der = std::cos(M_PI * m) - 2.0 * M_PI * m * std::sin(M_PI * m);
    (der > 0 ? a : b) = m;
  }
  return 0.5 * (a + b);
}

double bisect_increasing(double lo, double hi, double t) {
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (lo + hi);
    (slice_profile(m) < t ? lo : hi) = m;
  }
  return 0.5 * (lo + hi);
}

double bisect_decreasing(double lo, double hi, double t) {
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (lo + hi);
    (slice_profile(m) > t ? lo : hi) = m;
  }
  return 0.5 * (lo + hi);
}

// Length of {d in [0, 1/4] : g(d) <= t}.
double sublevel_length(double t, double dmax) {
  if (t <= 0) return 0.0;
  const double gmax = slice_profile(dmax);
  if (t >= gmax) return 0.25;
  const double inc = bisect_increasing(0.0, dmax, t);
  if (t <= slice_profile(0.25)) return inc;
  return inc + (0.25 - bisect_decreasing(dmax, 0.25, t));
}

}  // namespace

StructureEstimate structure_constant_sliced(const ManufacturedProblem& mp,
                                            std::span<const double> eps_grid) {
  const double c = std::abs(mp.amplitude);
  const double dmax = slice_profile_argmax();
  StructureEstimate est;
  est.eps_grid.assign(eps_grid.begin(), eps_grid.end());
  const int panels = 4000;
  for (double eps : eps_grid) {
    auto slice = [&](double x2) {
      const double s = std::sin(M_PI * x2);
      return 2.0 * sublevel_length(eps / (c * s * s), dmax);
    };
    double m = 0.0;
    const double hx = 0.5 / panels;
    for (int i = 0; i < panels; ++i) {
      const double x0 = 0.25 + i * hx;
      m += (slice(x0) + 4.0 * slice(x0 + 0.5 * hx) + slice(x0 + hx)) * hx / 6.0;
    }
    est.measures.push_back(m);
    est.ratios.push_back(m / eps);
    est.std_errors.push_back(0.0);
  }
  est.K = *std::max_element(est.ratios.begin(), est.ratios.end());
  return est;
}

GrowthCheckReport first_order_growth_check(const ManufacturedProblem& mp,
                                           const Discretization& disc, double kappa,
                                           int n_samples, unsigned seed,
                                           const SolverOptions& options) {
  const ControlRegion& region = disc.region;
  const Mesh& mesh = *region.mesh;
  const double lo = mp.spec.lower_bound, hi = mp.spec.upper_bound;

  const ControlField u_exact = exact_control_field(mp, region);
  const StateSolution state = solve_state(disc, u_exact, options);
  const StateField phi = solve_adjoint(disc, u_exact, state.y, state.jacobian.get());
  const GradientDensity psi = gradient_from_fields(disc, u_exact, state.y, phi, 0.0);

  // sup deviation of the discrete density from the exact one, sampled per
  // element at vertices, barycenter and order-4 points (the exact density is
  // smooth, so sampling is adequate)
  double slack = 0.0;
  const auto rule = triangle_rule_order4();
  for (int k = 0; k < region.count(); ++k) {
    const int t = region.element_ids[k];
    const Triangle tri = mesh.triangle(t);
    auto dev = [&](const Point& p) {
      slack = std::max(slack, std::abs(mp.density_exact(p) - psi.density.values[k]));
    };
    for (int i = 0; i < 3; ++i) dev(tri[i]);
    dev(triangle_barycenter(tri));
    for (const QuadPoint& q : rule) dev(map_barycentric(tri, q));
  }

  // per-element split areas and exact control values
  const bool lower_left = mp.amplitude > 0;
  const double u_left = lower_left ? lo : hi;
  const double u_right = lower_left ? hi : lo;
  std::vector<double> area_left(region.count());
  for (int k = 0; k < region.count(); ++k)
    area_left[k] = area_below(mesh.triangle(region.element_ids[k]), mp.switch_line);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(lo, hi);
  GrowthCheckReport report;
  report.samples = n_samples;
  report.seed = seed;
  report.worst_margin = std::numeric_limits<double>::max();
  report.worst_margin_raw = std::numeric_limits<double>::max();
  for (int s = 0; s < n_samples; ++s) {
    double lhs = 0.0, dist = 0.0;
    for (int k = 0; k < region.count(); ++k) {
      const double area = mesh.element_areas[region.element_ids[k]];
      const double ar = area - area_left[k];
      const double uv = uni(rng);
      const double mean_exact = (area_left[k] * u_left + ar * u_right) / area;
      lhs += psi.density.values[k] * (uv - mean_exact) * area;
      dist += area_left[k] * std::abs(uv - u_left) + ar * std::abs(uv - u_right);
    }
    const double margin = lhs + slack * dist - kappa * dist * dist;
    const double raw = lhs - kappa * dist * dist;
    if (margin < report.worst_margin) {
      report.worst_margin = margin;
      report.worst_sample = s;
    }
    report.worst_margin_raw = std::min(report.worst_margin_raw, raw);
    if (margin < 0.0) ++report.violations;
  }
  report.slack_constant = slack;
  return report;
}

CriticalConeSample sample_critical_cone(const Discretization& disc, const ControlField& u,
                                        const GradientDensity& psi, double tau, int n_dirs,
                                        unsigned seed) {
  if (!(tau > 0)) throw std::invalid_argument("sample_critical_cone: tau must be positive");
  const ControlRegion& region = disc.region;
  const double lo = disc.spec.lower_bound, hi = disc.spec.upper_bound;
  const double activity_tol = 1e-9 * std::max(1.0, hi - lo);

  CriticalConeSample sample;
  sample.tau = tau;
  for (int k = 0; k < region.count(); ++k)
    if (std::abs(psi.density.values[k]) <= tau) sample.support.push_back(k);
  if (sample.support.empty()) return sample;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mag(0.0, 1.0);
  std::bernoulli_distribution flip(0.5);
  for (int d = 0; d < n_dirs; ++d) {
    ControlField v;
    v.region = &region;
    v.values = Vector::Zero(region.count());
    for (int k : sample.support) {
      double m = 0.0;
      while (m == 0.0) m = mag(rng);
      double sign;
      if (u.values[k] <= lo + activity_tol)
        sign = 1.0;
      else if (u.values[k] >= hi - activity_tol)
        sign = -1.0;
      else
        sign = flip(rng) ? 1.0 : -1.0;
      v.values[k] = sign * m;
    }
    const double norm = l1_norm(v);
    if (norm > 0) v.values /= norm;
    sample.directions.push_back(std::move(v));
  }
  return sample;
}

std::pair<double, bool> second_order_verdict(double min_rayleigh, double kappa) {
  const double kappa_prime = std::max(0.0, -min_rayleigh);
  return {kappa_prime, kappa_prime < 2.0 * kappa};
}

SecondOrderReport second_order_condition_check(const HessianEvaluator& hessian,
                                               const CriticalConeSample& sample, double kappa) {
  SecondOrderReport report;
  report.tau = sample.tau;
  report.directions = static_cast<int>(sample.directions.size());
  report.kappa = kappa;
  if (sample.support.empty() || sample.directions.empty()) {
    report.cone_empty = true;
    report.min_rayleigh = 0.0;
    report.kappa_prime = 0.0;
    report.satisfied = true;
    return report;
  }
  double min_rayleigh = std::numeric_limits<double>::max();
  for (const ControlField& v : sample.directions) {
    report.rayleigh_values.push_back(hessian.form(v, v).via_sensitivity);
    min_rayleigh = std::min(min_rayleigh, report.rayleigh_values.back());
  }
  report.min_rayleigh = min_rayleigh;
  std::tie(report.kappa_prime, report.satisfied) = second_order_verdict(min_rayleigh, kappa);
  return report;
}

ControlField transfer_control(const ControlField& coarse, const ControlRegion& fine_region,
                              const ScalarFn* fallback, std::span<const Line> fallback_lines) {
  const ControlRegion& coarse_region = *coarse.region;
  const Mesh& coarse_mesh = *coarse_region.mesh;
  const Mesh& fine_mesh = *fine_region.mesh;
  std::vector<int> coarse_index(coarse_mesh.element_count(), -1);
  for (int k = 0; k < coarse_region.count(); ++k)
    coarse_index[coarse_region.element_ids[k]] = k;

  ControlField out;
  out.region = &fine_region;
  out.values.resize(fine_region.count());
  const auto rule = triangle_rule_order4();
  for (int k = 0; k < fine_region.count(); ++k) {
    const int t = fine_region.element_ids[k];
    const int parent = locate_element(coarse_mesh, fine_mesh.barycenter(t));
    const int idx = coarse_index[parent];
    if (idx >= 0) {
      out.values[k] = coarse.values[idx];
    } else if (fallback) {
      out.values[k] = integrate_split(*fallback, fine_mesh.triangle(t), fallback_lines, rule) /
                      fine_mesh.element_areas[t];
    } else {
      throw std::runtime_error("transfer_control: fine element has no covered coarse parent");
    }
  }
  return out;
}

std::vector<NoGrowthRow> no_growth_study(const ProblemSpec& spec, const Mesh& mesh,
                                         const ControlField& u_center,
                                         std::span<const int> stripe_elements, double delta,
                                         std::span<const int> k_list, int ref_multiple,
                                         const SolverOptions& options) {
  const ControlRegion& region = *u_center.region;
  if (region.mesh != &mesh)
    throw std::invalid_argument("no_growth_study: control not on the given mesh");
  if (mesh.subdivisions <= 0)
    throw std::invalid_argument("no_growth_study: needs a canonical structured mesh");

  double stripe_area = 0.0;
  double rho = std::numeric_limits<double>::max();
  for (int k : stripe_elements) {
    stripe_area += mesh.element_areas[region.element_ids[k]];
    rho = std::min(rho, std::min(u_center.values[k] - spec.lower_bound,
                                 spec.upper_bound - u_center.values[k]));
  }
  if (stripe_elements.empty() || rho <= 0)
    throw std::invalid_argument("no_growth_study: control must be interior-valued on B");
  if (delta > rho * stripe_area + 1e-14)
    throw std::invalid_argument("no_growth_study: delta exceeds rho |B|, perturbations leave "
                                "the admissible set");

  // reference discretization, no Tikhonov term in the reference objective
  ProblemSpec ref_spec = spec;
  ref_spec.tikhonov_factor = 0.0;
  const Mesh mesh_ref = build_uniform_mesh(mesh.subdivisions * ref_multiple, mesh.domain);
  const Discretization disc_ref = discretize(ref_spec, mesh_ref);

  const ControlField center_ref = transfer_control(u_center, disc_ref.region);
  const double j_center = objective_value(disc_ref, center_ref, options);

  std::vector<NoGrowthRow> rows;
  for (int k_stripes : k_list) {
    ControlField u_k = u_center;
    double distance = 0.0;
    for (int k : stripe_elements) {
      const int t = region.element_ids[k];
      const double s = std::sin(k_stripes * M_PI * mesh.barycenter(t).x());
      const double v = s > 0 ? 1.0 : (s < 0 ? -1.0 : 0.0);
      u_k.values[k] += delta / stripe_area * v;
      distance += mesh.element_areas[t] * std::abs(v) * delta / stripe_area;
    }
    const ControlField u_k_ref = transfer_control(u_k, disc_ref.region);
    const double j_k = objective_value(disc_ref, u_k_ref, options);
    rows.push_back({k_stripes, distance, j_k - j_center});
  }
  return rows;
}

ErrorBoundReport control_error_bound(const ManufacturedProblem& mp,
                                     const Discretization& disc_h, const Mesh& mesh_ref,
                                     const ControlField& u_h, double kappa,
                                     double kappa_prime, const SolverOptions& options) {
  if (kappa_prime >= kappa)
    throw std::invalid_argument("control_error_bound: needs kappa' < kappa");
  const Mesh& mesh_h = *disc_h.mesh;
  if (mesh_ref.h > mesh_h.h / 4.0 + 1e-14)
    throw std::invalid_argument("control_error_bound: reference mesh must be at least 4x finer");

  ErrorBoundReport report;
  report.gamma = 0.5 * (kappa - kappa_prime);

  const Discretization disc_ref = discretize(mp.spec, mesh_ref);
  const ControlRegion& region_h = disc_h.region;
  const ControlRegion& region_ref = disc_ref.region;

  // discrete gradient density at u_h (with its Tikhonov part)
  const StateSolution state_h = solve_state(disc_h, u_h, options);
  const StateField phi_h = solve_adjoint(disc_h, u_h, state_h.y, state_h.jacobian.get());
  const GradientDensity psi_h =
      gradient_from_fields(disc_h, u_h, state_h.y, phi_h, disc_h.tikhonov);

  // reference proxy for the continuous gradient at the extension of u_h
  const Line fallback_lines[] = {mp.switch_line};
  const ControlField u_ext =
      transfer_control(u_h, region_ref, &mp.control_exact, fallback_lines);
  const StateSolution state_ref = solve_state(disc_ref, u_ext, options);
  const StateField phi_ref = solve_adjoint(disc_ref, u_ext, state_ref.y, state_ref.jacobian.get());
  const GradientDensity psi_ref =
      gradient_from_fields(disc_ref, u_ext, state_ref.y, phi_ref, 0.0);

  std::vector<int> coarse_index(mesh_h.element_count(), -1);
  for (int k = 0; k < region_h.count(); ++k) coarse_index[region_h.element_ids[k]] = k;

  double gap = 0.0;
  for (int k = 0; k < region_ref.count(); ++k) {
    const int t = region_ref.element_ids[k];
    const int parent = locate_element(mesh_h, mesh_ref.barycenter(t));
    const int idx = coarse_index[parent];
    if (idx < 0) continue;
    gap = std::max(gap, std::abs(psi_h.density.values[idx] - psi_ref.density.values[k]));
  }
  report.gradient_gap = gap;

  // measured finite-element constant on the reference mesh at the exact control
  const ControlField u_exact_ref = exact_control_field(mp, region_ref);
  const StateSolution ref_exact = solve_state(disc_ref, u_exact_ref, options);
  const StateField phi_exact_ref =
      solve_adjoint(disc_ref, u_exact_ref, ref_exact.y, ref_exact.jacobian.get());
  const double fem_const =
      (linf_error(mesh_ref, ref_exact.y.values, mp.state_exact) +
       linf_error(mesh_ref, phi_exact_ref.values, mp.adjoint_exact)) /
      mesh_ref.h;
  report.slack = 2.0 * fem_const * mesh_ref.h;

  const double g = report.gamma;
  report.term_gradient = (g + 1.0) / (g * g) * (gap + report.slack) * (gap + report.slack);

  // candidate: cell averages of the exact control on the coarse region
  const ControlField projected = exact_control_field(mp, region_h);
  report.projection_l1 = control_error_l1(mp, projected);

  // 2 J'(ext)(P u - u) with the reference density, switching-line-split quadrature
  const auto rule = triangle_rule_order4();
  double cross = 0.0;
  const bool lower_left = mp.amplitude > 0;
  const double u_left = lower_left ? mp.spec.lower_bound : mp.spec.upper_bound;
  const double u_right = lower_left ? mp.spec.upper_bound : mp.spec.lower_bound;
  for (int k = 0; k < region_ref.count(); ++k) {
    const int t = region_ref.element_ids[k];
    const int parent = locate_element(mesh_h, mesh_ref.barycenter(t));
    const int idx = coarse_index[parent];
    if (idx < 0) continue;  // extension by the exact control: difference vanishes
    const double pu = projected.values[idx];
    const Triangle tri = mesh_ref.triangle(t);
    auto integrand = [&](const Point& x) {
      const double density =
          -interpolate_in_element(mesh_ref, phi_ref.values, t, x) *
          interpolate_in_element(mesh_ref, state_ref.y.values, t, x);
      const double u_ex = mp.switch_line.signed_distance(x) < 0 ? u_left : u_right;
      return density * (pu - u_ex);
    };
    cross += integrate_split(integrand, tri, fallback_lines, rule);
  }
  report.cross_term = 2.0 * cross;
  report.term_projection =
      (report.projection_l1 * report.projection_l1 + report.cross_term) / g;
  report.total = report.term_gradient + report.term_projection;
  const double err = control_error_l1(mp, u_h);
  report.error_sq = err * err;
  report.satisfied = report.error_sq <= report.total;
  return report;
}

ConvergenceTable convergence_study(const ManufacturedProblem& mp, std::span<const int> levels,
                                   double c_tik, const StudyOptions& options) {
  if (levels.size() < 2)
    throw std::invalid_argument("convergence_study: need at least two levels");

  ConvergenceTable table;
  table.kappa = options.kappa;
  if (std::isnan(table.kappa)) {
    const auto grid = default_eps_grid(density_max(mp));
    table.kappa =
        structure_constant_sliced(mp, grid).kappa(mp.spec.upper_bound - mp.spec.lower_bound);
  }
  table.kappa_prime = options.kappa_prime;
  if (!(table.kappa_prime < table.kappa))
    throw std::invalid_argument("convergence_study: kappa' must be below kappa");

  auto run_level = [&](int n) -> ConvergenceRow {
    ProblemSpec spec = mp.spec;
    spec.tikhonov_factor = c_tik;
    const Mesh mesh = build_uniform_mesh(n, Rect{});
    const Discretization disc = discretize(spec, mesh);
    const ControlSolution sol = solve_control_problem(disc, options.optimizer, options.solver);
    if (!sol.certificate.converged)
      throw std::runtime_error("convergence_study: optimizer stalled at level n=" +
                               std::to_string(n) + " with residual " +
                               std::to_string(sol.certificate.residual));
    ConvergenceRow row;
    row.n = n;
    row.h = mesh.h;
    row.alpha_h = disc.tikhonov;
    row.l1_error = control_error_l1(mp, sol.control);
    if (options.with_bound) {
      const Mesh mesh_ref = build_uniform_mesh(n * options.ref_multiple, Rect{});
      const ErrorBoundReport bound = control_error_bound(
          mp, disc, mesh_ref, sol.control, table.kappa, table.kappa_prime, options.solver);
      row.bound_term1 = bound.term_gradient;
      row.bound_term2 = bound.term_projection;
      row.bound_total = bound.total;
      row.bound_satisfied = bound.satisfied;
    }
    return row;
  };

  table.rows.reserve(levels.size());
  table.complete = true;
  if (options.threads > 1) {
    std::vector<std::future<ConvergenceRow>> futures;
    futures.reserve(levels.size());
    for (int n : levels)
      futures.push_back(std::async(std::launch::async, run_level, n));
    for (std::size_t i = 0; i < futures.size(); ++i) {
      try {
        ConvergenceRow row = futures[i].get();
        if (table.complete) table.rows.push_back(std::move(row));
      } catch (const std::exception& e) {
        if (table.complete) table.abort_reason = e.what();
        table.complete = false;
      }
    }
  } else {
    for (int n : levels) {
      try {
        table.rows.push_back(run_level(n));
      } catch (const std::exception& e) {
        table.abort_reason = e.what();
        table.complete = false;
        break;
      }
    }
  }

  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    const ConvergenceRow& a = table.rows[i - 1];
    ConvergenceRow& b = table.rows[i];
    if (a.l1_error > 0 && b.l1_error > 0)
      b.eoc = std::log(a.l1_error / b.l1_error) / std::log(a.h / b.h);
  }
  return table;
}

}  // namespace bilopt
