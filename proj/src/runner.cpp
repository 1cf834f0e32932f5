#include <bilopt/runner.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>

namespace bilopt {

namespace {

namespace fs = std::filesystem;

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

File open_out(const fs::path& path) {
  File f(std::fopen(path.string().c_str(), "wb"));
  if (!f) throw std::runtime_error("cannot open output file " + path.string());
  return f;
}

void write_provenance(const fs::path& dir, const RunConfig& config) {
  fs::create_directories(dir);
  {
    File f = open_out(dir / "config.echo.ini");
    std::fwrite(config.raw_text.data(), 1, config.raw_text.size(), f.get());
  }
  {
    File f = open_out(dir / "version.txt");
    std::fprintf(f.get(), "%s\n", kVersionString);
  }
}

void write_diagnostics(const fs::path& dir, const std::string& message) {
  File f = open_out(dir / "diagnostics.txt");
  std::fprintf(f.get(), "%s\n", message.c_str());
}

OptimizerConfig optimizer_config(const RunConfig& config) {
  OptimizerConfig opt;
  opt.max_iterations = config.max_iterations;
  opt.tolerance = config.tolerance;
  opt.armijo_slope = config.armijo_slope;
  opt.backtrack = config.backtrack;
  opt.initial_value = config.initial;
  return opt;
}

const ManufacturedProblem& require_manufactured(const ConfiguredProblem& problem,
                                                const char* command) {
  if (!problem.manufactured)
    throw ConfigError(std::string(command) +
                      " requires a manufactured problem kind (analytic control needed)");
  return *problem.manufactured;
}

void write_control_csv(const fs::path& path, const ControlField& u, const char* value_name) {
  File f = open_out(path);
  std::fprintf(f.get(), "element_id,x,y,%s\n", value_name);
  const ControlRegion& region = *u.region;
  for (int k = 0; k < region.count(); ++k) {
    const int t = region.element_ids[k];
    const Point c = region.mesh->barycenter(t);
    std::fprintf(f.get(), "%d,%.17g,%.17g,%.17g\n", t, c.x(), c.y(), u.values[k]);
  }
}

void write_state_csv(const fs::path& path, const Mesh& mesh, const Vector& values,
                     const char* value_name) {
  File f = open_out(path);
  std::fprintf(f.get(), "node_id,x,y,%s\n", value_name);
  for (int i = 0; i < mesh.node_count(); ++i)
    std::fprintf(f.get(), "%d,%.17g,%.17g,%.17g\n", i, mesh.nodes(i, 0), mesh.nodes(i, 1),
                 values[i]);
}

}  // namespace

ConfiguredProblem build_problem(const RunConfig& config) {
  ConfiguredProblem problem;
  if (config.kind == "manufactured_linear" || config.kind == "manufactured_cubic") {
    const ManufacturedKind kind = config.kind == "manufactured_cubic"
                                      ? ManufacturedKind::Cubic
                                      : ManufacturedKind::Linear;
    problem.manufactured =
        make_manufactured_problem(kind, config.amplitude, config.alpha, config.beta);
    problem.manufactured->spec.tikhonov_factor = config.c_tik;
    problem.spec = problem.manufactured->spec;
    return problem;
  }
  // custom coefficients
  ProblemSpec spec;
  const double a11 = config.a11, a12 = config.a12, a22 = config.a22, a0 = config.a0;
  spec.diffusion = [a11, a12, a22](const Point&) {
    Eigen::Matrix2d a;
    a << a11, a12, a12, a22;
    return a;
  };
  spec.reaction = [a0](const Point&) { return a0; };
  spec.semilinear = config.b == "cubic"    ? cubic_nonlinearity()
                    : config.b == "linear" ? linear_nonlinearity()
                                           : zero_nonlinearity();
  spec.source = config.f == "one" ? ScalarFn([](const Point&) { return 1.0; })
                                  : ScalarFn([](const Point&) { return 0.0; });
  spec.target = config.y_d == "one" ? ScalarFn([](const Point&) { return 1.0; })
                                    : ScalarFn([](const Point&) { return 0.0; });
  spec.control_box = Rect{config.omega[0], config.omega[1], config.omega[2], config.omega[3]};
  spec.lower_bound = config.alpha;
  spec.upper_bound = config.beta;
  spec.tikhonov_factor = config.c_tik;
  problem.spec = spec;
  return problem;
}

std::string resolve_output_dir(const RunConfig& config) {
  if (const char* env = std::getenv("BILOPT_OUTPUT_DIR"); env && *env) return env;
  return config.directory;
}

void run_solve(const RunConfig& config) {
  const fs::path dir = resolve_output_dir(config);
  write_provenance(dir, config);
  const ConfiguredProblem problem = build_problem(config);

  const Mesh mesh = build_uniform_mesh(config.n);
  const Discretization disc = discretize(problem.spec, mesh);
  try {
    const ControlSolution sol = solve_control_problem(disc, optimizer_config(config));
    const StateSolution state = solve_state(disc, sol.control);
    const StateField adjoint = solve_adjoint(disc, sol.control, state.y, state.jacobian.get());
    const GradientDensity psi =
        gradient_from_fields(disc, sol.control, state.y, adjoint, disc.tikhonov);

    write_control_csv(dir / "control.csv", sol.control, "u");
    write_state_csv(dir / "state.csv", mesh, state.y.values, "y");
    write_state_csv(dir / "adjoint.csv", mesh, adjoint.values, "phi");
    write_control_csv(dir / "psi.csv", psi.density, "psi");

    File report = open_out(dir / "report.txt");
    std::fprintf(report.get(), "command=solve\nversion=%s\n", kVersionString);
    std::fprintf(report.get(), "n=%d\nh=%.17g\nalpha_h=%.17g\n", config.n, mesh.h,
                 disc.tikhonov);
    std::fprintf(report.get(), "converged=%s\n", sol.certificate.converged ? "true" : "false");
    std::fprintf(report.get(), "iterations=%d\nstationarity_residual=%.17g\n",
                 sol.report.iterations, sol.certificate.residual);
    std::fprintf(report.get(), "objective=%.17g\n", sol.objective);
    std::fprintf(report.get(), "wall_time_s=%.6f\n", sol.report.wall_time_s);
    if (!sol.certificate.converged)
      throw std::runtime_error("optimizer did not reach the stationarity tolerance: residual " +
                               std::to_string(sol.certificate.residual));
  } catch (const std::exception& e) {
    write_diagnostics(dir, e.what());
    throw;
  }
}

void run_converge(const RunConfig& config) {
  const fs::path dir = resolve_output_dir(config);
  write_provenance(dir, config);
  const ConfiguredProblem problem = build_problem(config);
  const ManufacturedProblem& mp = require_manufactured(problem, "converge");
  if (config.levels.size() < 4)
    throw ConfigError("converge: at least 4 mesh levels required");

  StudyOptions options;
  options.optimizer = optimizer_config(config);
  options.threads = config.threads;
  const ConvergenceTable table = convergence_study(mp, config.levels, config.c_tik, options);

  {
    File f = open_out(dir / "converge.csv");
    std::fprintf(f.get(),
                 "h,alpha_h,l1_error,eoc,bound_term1,bound_term2,bound_total,bound_satisfied\n");
    for (const auto& row : table.rows)
      std::fprintf(f.get(), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%s\n", row.h,
                   row.alpha_h, row.l1_error, row.eoc, row.bound_term1, row.bound_term2,
                   row.bound_total, row.bound_satisfied ? "true" : "false");
    if (!table.complete) std::fprintf(f.get(), "# incomplete: %s\n", table.abort_reason.c_str());
  }
  File report = open_out(dir / "report.txt");
  std::fprintf(report.get(), "command=converge\nversion=%s\n", kVersionString);
  std::fprintf(report.get(), "kappa=%.17g\nkappa_prime=%.17g\n", table.kappa,
               table.kappa_prime);
  std::fprintf(report.get(), "complete=%s\n", table.complete ? "true" : "false");
  if (!table.complete) {
    write_diagnostics(dir, table.abort_reason);
    throw std::runtime_error("converge aborted: " + table.abort_reason);
  }
}

void run_analyze(const RunConfig& config) {
  const fs::path dir = resolve_output_dir(config);
  write_provenance(dir, config);
  const ConfiguredProblem problem = build_problem(config);
  const ManufacturedProblem& mp = require_manufactured(problem, "analyze");

  const Mesh mesh = build_uniform_mesh(config.n);
  const Discretization disc = discretize(mp.spec, mesh);
  const auto grid = default_eps_grid(density_max(mp));
  const StructureEstimate sliced = structure_constant_sliced(mp, grid);
  const double kappa = sliced.kappa(mp.spec.upper_bound - mp.spec.lower_bound);

  try {
    if (config.structure) {
      const StructureEstimate sampled = estimate_structure_constant(
          mp.density_exact, mp.spec.control_box, grid, config.sample_points);
      File f = open_out(dir / "structure.csv");
      std::fprintf(f.get(), "epsilon,measure,ratio,std_error,K_sampled,K_sliced,kappa\n");
      for (std::size_t i = 0; i < sampled.eps_grid.size(); ++i)
        std::fprintf(f.get(), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                     sampled.eps_grid[i], sampled.measures[i], sampled.ratios[i],
                     sampled.std_errors[i], sampled.K, sliced.K, kappa);
    }

    if (config.soc || config.bound) {
      const ControlSolution sol = solve_control_problem(disc, optimizer_config(config));
      if (!sol.certificate.converged)
        throw std::runtime_error("analyze: optimizer stalled at residual " +
                                 std::to_string(sol.certificate.residual));

      if (config.soc) {
        const HessianEvaluator hessian(disc, sol.control, 0.0);
        const GradientDensity psi = gradient_from_fields(disc, sol.control, hessian.state(),
                                                         hessian.adjoint(), 0.0);
        const double psi_max = psi.density.values.cwiseAbs().maxCoeff();
        File f = open_out(dir / "soc.csv");
        std::fprintf(f.get(),
                     "tau,directions,cone_empty,min_rayleigh,kappa,kappa_prime,satisfied\n");
        for (std::size_t i = 0; i < config.tau_factors.size(); ++i) {
          const double tau = config.tau_factors[i] * psi_max;
          const CriticalConeSample sample =
              sample_critical_cone(disc, sol.control, psi, tau, config.directions,
                                   config.seed + static_cast<unsigned>(i));
          const SecondOrderReport report = second_order_condition_check(hessian, sample, kappa);
          std::fprintf(f.get(), "%.17g,%d,%s,%.17g,%.17g,%.17g,%s\n", report.tau,
                       report.directions, report.cone_empty ? "true" : "false",
                       report.min_rayleigh, report.kappa, report.kappa_prime,
                       report.satisfied ? "true" : "false");
        }
      }

      if (config.bound) {
        const Mesh mesh_ref = build_uniform_mesh(4 * config.n);
        const ErrorBoundReport report =
            control_error_bound(mp, disc, mesh_ref, sol.control, kappa, 0.0);
        File f = open_out(dir / "bound.csv");
        std::fprintf(f.get(),
                     "gamma,gradient_gap,slack,term_gradient,projection_l1,cross_term,"
                     "term_projection,total,error_sq,satisfied\n");
        std::fprintf(f.get(), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%s\n",
                     report.gamma, report.gradient_gap, report.slack, report.term_gradient,
                     report.projection_l1, report.cross_term, report.term_projection,
                     report.total, report.error_sq, report.satisfied ? "true" : "false");
      }
    }

    if (config.no_growth) {
      ProblemSpec spec = mp.spec;
      spec.tikhonov_factor = 0.0;
      const Discretization plain = discretize(spec, mesh);
      const double mid = 0.5 * (spec.lower_bound + spec.upper_bound);
      const ControlField center = constant_control(plain.region, mid);
      std::vector<int> all_elements(plain.region.count());
      for (int k = 0; k < plain.region.count(); ++k) all_elements[k] = k;
      const double rho = 0.5 * (spec.upper_bound - spec.lower_bound);
      const double delta = 0.5 * rho * plain.region.covered_area();
      const auto rows =
          no_growth_study(spec, mesh, center, all_elements, delta, config.stripes, 4);
      File f = open_out(dir / "nogrowth.csv");
      std::fprintf(f.get(), "k,l1_distance,delta_j\n");
      for (const auto& row : rows)
        std::fprintf(f.get(), "%d,%.17g,%.17g\n", row.k, row.l1_distance, row.delta_j);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    write_diagnostics(dir, e.what());
    throw;
  }

  File report = open_out(dir / "report.txt");
  std::fprintf(report.get(), "command=analyze\nversion=%s\n", kVersionString);
  std::fprintf(report.get(), "n=%d\nkappa=%.17g\nK_sliced=%.17g\n", config.n, kappa, sliced.K);
}

}  // namespace bilopt
