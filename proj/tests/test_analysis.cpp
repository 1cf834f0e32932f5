#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bilopt/analysis.hpp>

#include <cmath>
#include <random>

using namespace bilopt;

namespace {

const Rect kOmega{0.25, 0.25, 0.75, 0.75};

}  // namespace

TEST_CASE("structure constant of a linear strip density is one") {
  const ScalarFn strip = [](const Point& p) { return p.x() - 0.5; };
  const auto grid = default_eps_grid(0.25);
  const StructureEstimate est = estimate_structure_constant(strip, kOmega, grid);
  CHECK_FALSE(est.degenerate);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(est.measures[i] == doctest::Approx(grid[i]).epsilon(0.03));
    if (i > 0) CHECK(est.measures[i] >= est.measures[i - 1]);  // m nondecreasing
  }
  CHECK(est.K == doctest::Approx(1.0).epsilon(0.03));
  CHECK(est.K > 0);
  CHECK(est.kappa(1.0) == doctest::Approx(0.25).epsilon(0.03));
}

TEST_CASE("sampled and sliced structure constants agree for the manufactured density") {
  const ManufacturedProblem mp = make_manufactured_problem(ManufacturedKind::Cubic, 1.0, 0, 1);
  const auto grid = default_eps_grid(density_max(mp));
  const StructureEstimate sliced = structure_constant_sliced(mp, grid);
  const StructureEstimate sampled =
      estimate_structure_constant(mp.density_exact, kOmega, grid);
  CHECK(sampled.K == doctest::Approx(sliced.K).epsilon(0.02));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(sampled.std_errors[i] > 0.0);
    CHECK(std::abs(sampled.measures[i] - sliced.measures[i]) <=
          5.0 * sampled.std_errors[i] + 1e-4 * sliced.measures[i]);
  }
  // kappa satisfies its defining identity exactly
  const double gap = 1.0;
  CHECK(std::abs(sliced.kappa(gap) * 4.0 * gap * sliced.K - 1.0) <= 1e-15);
}

TEST_CASE("density vanishing on a set of positive measure is flagged") {
  const Rect dead{0.3, 0.3, 0.4, 0.4};
  const ScalarFn flat = [dead](const Point& p) {
    return dead.contains(p) ? 0.0 : std::abs(p.x() - 0.5) + 0.01;
  };
  const auto grid = default_eps_grid(0.26);
  const StructureEstimate est = estimate_structure_constant(flat, kOmega, grid);
  CHECK(est.degenerate);
  CHECK(std::isinf(est.K));
}

TEST_CASE("first-order growth holds for random admissible perturbations") {
  const ManufacturedProblem mp = make_manufactured_problem(ManufacturedKind::Cubic, 4.0, 0, 1);
  const Mesh mesh = build_uniform_mesh(32);
  ProblemSpec spec = mp.spec;
  spec.tikhonov_factor = 0.0;
  const Discretization disc = discretize(spec, mesh);
  const auto grid = default_eps_grid(density_max(mp));
  const double kappa = structure_constant_sliced(mp, grid).kappa(1.0);

  const GrowthCheckReport report = first_order_growth_check(mp, disc, kappa, 100, 2024);
  CHECK(report.samples == 100);
  CHECK(report.violations == 0);
  CHECK(report.worst_margin >= 0.0);
  CHECK(report.slack_constant > 0.0);
  CHECK(report.slack_constant <= 10.0 * mesh.h);
}

TEST_CASE("single-element flip has closed-form pairing and a large margin") {
  const ManufacturedProblem mp = make_manufactured_problem(ManufacturedKind::Cubic, 4.0, 0, 1);
  const Mesh mesh = build_uniform_mesh(16);
  ProblemSpec spec = mp.spec;
  spec.tikhonov_factor = 0.0;
  const Discretization disc = discretize(spec, mesh);
  const ControlField u_exact = exact_control_field(mp, disc.region);
  const StateSolution sol = solve_state(disc, u_exact);
  const StateField phi = solve_adjoint(disc, u_exact, sol.y, sol.jacobian.get());
  const GradientDensity psi = gradient_from_fields(disc, u_exact, sol.y, phi, 0.0);

  // farthest-from-switch element
  int far = 0;
  double best = -1.0;
  for (int k = 0; k < disc.region.count(); ++k) {
    const double d = std::abs(mesh.barycenter(disc.region.element_ids[k]).x() - 0.5);
    if (d > best) {
      best = d;
      far = k;
    }
  }
  ControlField u = u_exact;
  const double lo = 0.0, hi = 1.0;
  u.values[far] = u.values[far] == lo ? hi : lo;
  const double area = mesh.element_areas[disc.region.element_ids[far]];
  const double pairing = psi.density.values[far] * (u.values[far] - u_exact.values[far]) * area;
  CHECK(pairing == doctest::Approx(std::abs(psi.density.values[far]) * (hi - lo) * area)
                       .epsilon(1e-12));
  const auto grid = default_eps_grid(density_max(mp));
  const double kappa = structure_constant_sliced(mp, grid).kappa(1.0);
  const double dist = (hi - lo) * area;
  CHECK(pairing >= 10.0 * kappa * dist * dist);
}

TEST_CASE("critical cone sampling") {
  const ManufacturedProblem mp = make_manufactured_problem(ManufacturedKind::Cubic, 4.0, 0, 1);
  const Mesh mesh = build_uniform_mesh(32);
  ProblemSpec spec = mp.spec;
  spec.tikhonov_factor = 0.0;
  const Discretization disc = discretize(spec, mesh);
  const ControlField u = exact_control_field(mp, disc.region);
  const StateSolution sol = solve_state(disc, u);
  const StateField phi = solve_adjoint(disc, u, sol.y, sol.jacobian.get());
  const GradientDensity psi = gradient_from_fields(disc, u, sol.y, phi, 0.0);
  const double psi_max = psi.density.values.cwiseAbs().maxCoeff();

  SUBCASE("tau below the smallest density gives an empty cone") {
    const double tau = 0.5 * psi.density.values.cwiseAbs().minCoeff() + 1e-300;
    const CriticalConeSample sample = sample_critical_cone(disc, u, psi, tau, 10, 1);
    CHECK(sample.support.empty());
    CHECK(sample.directions.empty());
  }

  SUBCASE("directions satisfy the cone constraints and are normalized") {
    const double tau = 0.1 * psi_max;
    const CriticalConeSample sample = sample_critical_cone(disc, u, psi, tau, 25, 7);
    REQUIRE_FALSE(sample.support.empty());
    for (const ControlField& v : sample.directions) {
      CHECK(l1_norm(v) == doctest::Approx(1.0).epsilon(1e-12));
      for (int k = 0; k < disc.region.count(); ++k) {
        if (std::abs(psi.density.values[k]) > tau) {
          CHECK(v.values[k] == 0.0);
        } else if (u.values[k] <= 0.0 + 1e-9) {
          CHECK(v.values[k] >= 0.0);
        } else if (u.values[k] >= 1.0 - 1e-9) {
          CHECK(v.values[k] <= 0.0);
        }
      }
    }
  }

  SUBCASE("support concentrates in a band around the switching line") {
    const double tau = 0.1 * psi_max;
    const CriticalConeSample sample = sample_critical_cone(disc, u, psi, tau, 1, 3);
    // |psi| ~ c s1^2 s2^2 |x-1/2| with s1^2 ~ 1 near the line and s2^2 >= 1/2:
    // the band halfwidth is at most tau / (c * min s2^2 * s1^2) plus one cell
    const double halfwidth = sample.tau / (4.0 * 0.5 * 0.9) + mesh.h;
    double max_offset = 0.0;
    for (int k : sample.support) {
      const double off = std::abs(mesh.barycenter(disc.region.element_ids[k]).x() - 0.5);
      max_offset = std::max(max_offset, off);
      CHECK(off <= halfwidth);
    }
    CHECK(max_offset >= 0.2 * halfwidth);  // the band is genuinely two-sided wide
  }
}

TEST_CASE("second-order verdict arithmetic") {
  CHECK(second_order_verdict(0.5, 0.2) == std::pair{0.0, true});
  CHECK(second_order_verdict(-0.1, 0.2).first == doctest::Approx(0.1));
  CHECK(second_order_verdict(-0.1, 0.2).second);        // 0.1 < 0.4
  CHECK_FALSE(second_order_verdict(-0.5, 0.2).second);  // 0.5 >= 0.4
}

TEST_CASE("sampled second-order condition on the manufactured problem") {
  const ManufacturedProblem mp = make_manufactured_problem(ManufacturedKind::Cubic, 4.0, 0, 1);
  const Mesh mesh = build_uniform_mesh(16);
  ProblemSpec spec = mp.spec;
  spec.tikhonov_factor = 0.0;
  const Discretization disc = discretize(spec, mesh);
  const ControlField u = exact_control_field(mp, disc.region);
  const HessianEvaluator hess(disc, u, 0.0);
  const StateField phi = hess.adjoint();
  const GradientDensity psi =
      gradient_from_fields(disc, u, hess.state(), phi, 0.0);
  const double psi_max = psi.density.values.cwiseAbs().maxCoeff();
  const auto grid = default_eps_grid(density_max(mp));
  const double kappa = structure_constant_sliced(mp, grid).kappa(1.0);

  const CriticalConeSample sample = sample_critical_cone(disc, u, psi, 0.1 * psi_max, 50, 11);
  const SecondOrderReport report = second_order_condition_check(hess, sample, kappa);
  CHECK(report.directions == 50);
  CHECK_FALSE(report.cone_empty);
  CHECK(report.kappa_prime < 2.0 * kappa);
  CHECK(report.satisfied);

  // Rayleigh quotients are scaling invariant
  const ControlField& v = sample.directions.front();
  ControlField v2 = v;
  v2.values *= 2.0;
  const double r1 = hess.form(v, v).via_sensitivity / (l1_norm(v) * l1_norm(v));
  const double r2 = hess.form(v2, v2).via_sensitivity / (l1_norm(v2) * l1_norm(v2));
  CHECK(r1 == doctest::Approx(r2).epsilon(1e-12));

  SUBCASE("empty cone reports a vacuous pass") {
    const CriticalConeSample empty = sample_critical_cone(disc, u, psi, 1e-300 + 1e-301, 5, 2);
    const SecondOrderReport vacuous = second_order_condition_check(hess, empty, kappa);
    CHECK(vacuous.cone_empty);
    CHECK(vacuous.satisfied);
  }
}

TEST_CASE("near-convex case: target at the reachable state gives nonnegative curvature") {
  // with the target set to the manufactured state itself, the adjoint nearly
  // vanishes and the quadratic form reduces to the positive z-mass-z term
  ProblemSpec spec;
  spec.source = [](const Point& p) {
    return 2.0 * M_PI * M_PI * std::sin(M_PI * p.x()) * std::sin(M_PI * p.y());
  };
  spec.target = [](const Point& p) { return std::sin(M_PI * p.x()) * std::sin(M_PI * p.y()); };
  spec.tikhonov_factor = 0.0;
  const Mesh mesh = build_uniform_mesh(16);
  const Discretization disc = discretize(spec, mesh);
  const ControlField u = constant_control(disc.region, 0.0);
  const HessianEvaluator hess(disc, u, 0.0);
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  double min_rayleigh = 1e300;
  for (int trial = 0; trial < 20; ++trial) {
    ControlField v = constant_control(disc.region, 0.0);
    for (int k = 0; k < v.values.size(); ++k) v.values[k] = uni(rng);
    const double n1 = l1_norm(v);
    v.values /= n1;
    min_rayleigh = std::min(min_rayleigh, hess.form(v, v).via_sensitivity);
  }
  CHECK(min_rayleigh >= -1e-8);
  CHECK(second_order_verdict(min_rayleigh, 0.1).second);
}
