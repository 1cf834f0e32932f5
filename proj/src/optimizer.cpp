#include <bilopt/optimizer.hpp>

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace bilopt {

ControlField project_box(ControlField u, double lower, double upper) {
  for (int k = 0; k < u.values.size(); ++k)
    u.values[k] = std::clamp(u.values[k], lower, upper);
  return u;
}

double stationarity_residual(const Discretization& disc, const ControlField& u,
                             const GradientDensity& psi) {
  const ControlRegion& region = disc.region;
  const double alpha = disc.spec.lower_bound, beta = disc.spec.upper_bound;
  double rho = 0.0;
  for (int k = 0; k < region.count(); ++k) {
    const double p = psi.density.values[k];
    const double violation =
        p > 0 ? p * (u.values[k] - alpha) : (p < 0 ? -p * (beta - u.values[k]) : 0.0);
    rho += region.mesh->element_areas[region.element_ids[k]] * violation;
  }
  return rho;
}

namespace {

std::vector<ElementActivity> classify(const Discretization& disc, const ControlField& u) {
  const double alpha = disc.spec.lower_bound, beta = disc.spec.upper_bound;
  const double tol = 1e-12 * std::max(1.0, beta - alpha);
  std::vector<ElementActivity> out(u.values.size());
  for (int k = 0; k < u.values.size(); ++k) {
    if (u.values[k] <= alpha + tol)
      out[k] = ElementActivity::LowerActive;
    else if (u.values[k] >= beta - tol)
      out[k] = ElementActivity::UpperActive;
    else
      out[k] = ElementActivity::Undecided;
  }
  return out;
}

}  // namespace

ControlSolution solve_control_problem(const Discretization& disc, const OptimizerConfig& config,
                                      const SolverOptions& solver, const ControlField* initial) {
  if (!(config.tolerance > 0.0))
    throw std::invalid_argument("solve_control_problem: tolerance must be positive");
  if (!(config.armijo_slope > 0.0 && config.armijo_slope < 1.0))
    throw std::invalid_argument("solve_control_problem: Armijo slope must be in (0,1)");
  const auto t0 = std::chrono::steady_clock::now();
  const double alpha = disc.spec.lower_bound, beta = disc.spec.upper_bound;

  ControlField u = initial ? project_box(*initial, alpha, beta)
                           : constant_control(disc.region,
                                              std::isnan(config.initial_value)
                                                  ? 0.5 * (alpha + beta)
                                                  : std::clamp(config.initial_value, alpha, beta));
  if (initial && initial->region != &disc.region)
    throw std::invalid_argument("solve_control_problem: initial control on a foreign region");

  ControlSolution sol;
  StateSolution state = solve_state(disc, u, solver);
  double j = objective_value_at(disc, u, state.y);
  double rho = std::numeric_limits<double>::max();

  // plateau damping: micro-cycles of the projected map near clamp boundaries
  // are broken by persistently shrinking the step scale
  double step_scale = 1.0;
  double best_rho = std::numeric_limits<double>::max();
  int since_improvement = 0;

  int iter = 0;
  for (; iter < config.max_iterations; ++iter) {
    const StateField phi = solve_adjoint(disc, u, state.y, state.jacobian.get());
    const GradientDensity psi = gradient_from_fields(disc, u, state.y, phi, disc.tikhonov);
    rho = stationarity_residual(disc, u, psi);
    sol.report.residual_history.push_back(rho);
    if (rho <= config.tolerance) break;
    if (rho < 0.999 * best_rho) {
      best_rho = rho;
      since_improvement = 0;
    } else if (++since_improvement >= 20 && step_scale > 1e-6) {
      step_scale *= 0.5;
      since_improvement = 0;
    }

    // Armijo backtracking along the projected gradient path, step reset each
    // iteration.  The acceptance test carries a noise allowance tied to the
    // state-solver tolerance, so the iteration keeps contracting once the
    // predicted decrease drops below the resolution of the objective values.
    const double noise = std::max(1e-14, 100.0 * solver.newton_tol) * (1.0 + std::abs(j));
    double step = config.initial_step * step_scale;
    bool accepted = false;
    bool stationary = false;
    for (int back = 0; back < 40; ++back) {
      ControlField trial = u;
      trial.values -= step * psi.density.values;
      trial = project_box(std::move(trial), alpha, beta);
      const double slope = gradient_pairing(psi, {trial.region, trial.values - u.values});
      if (slope >= 0.0) {
        stationary = back == 0;  // the projected step does not move the iterate
        break;
      }
      StateSolution trial_state = solve_state(disc, trial, solver, &state.y.values);
      const double j_trial = objective_value_at(disc, trial, trial_state.y);
      if (j_trial <= j + config.armijo_slope * slope + noise) {
        u = std::move(trial);
        state = std::move(trial_state);
        j = j_trial;
        accepted = true;
        break;
      }
      step *= config.backtrack;
    }
    if (stationary) break;
    if (!accepted) {
      step_scale *= 0.5;
      if (step_scale < 1e-8) break;  // numerically stationary
    }
  }

  sol.certificate.residual = rho;
  sol.certificate.converged = rho <= config.tolerance;
  sol.certificate.classification = classify(disc, u);
  sol.control = std::move(u);
  sol.objective = j;
  sol.report.iterations = iter;
  sol.report.residual = rho;
  sol.report.converged = sol.certificate.converged;
  sol.report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

ControlField round_to_bounds(const ControlField& u, const GradientDensity& psi, double tau,
                             double lower, double upper, int* unchanged_count) {
  if (psi.density.region != u.region)
    throw std::invalid_argument("round_to_bounds: density on a foreign region");
  ControlField out = u;
  int unchanged = 0;
  for (int k = 0; k < u.values.size(); ++k) {
    const double p = psi.density.values[k];
    if (p > tau)
      out.values[k] = lower;
    else if (p < -tau)
      out.values[k] = upper;
    else
      ++unchanged;
  }
  if (unchanged_count) *unchanged_count = unchanged;
  return out;
}

}  // namespace bilopt
