#pragma once

#include <bilopt/objective.hpp>

namespace bilopt {

struct OptimizerConfig {
  int max_iterations = 5000;
  double tolerance = 1e-9;       // stationarity residual rho
  double armijo_slope = 1e-4;    // in (0,1)
  double backtrack = 0.5;
  double initial_step = 1.0;
  double initial_value = std::numeric_limits<double>::quiet_NaN();  // default: midpoint
};

enum class ElementActivity { LowerActive, UpperActive, Undecided };

/// rho(u) = sum_T |T| |min_{w in [alpha,beta]} psi_T (w - u_T)|, zero exactly at
/// solutions of the discrete variational inequality.
struct StationarityCertificate {
  double residual = 0.0;
  std::vector<ElementActivity> classification;
  bool converged = false;
};

struct ControlSolution {
  ControlField control;
  StationarityCertificate certificate;
  SolveReport report;
  double objective = 0.0;
};

ControlField project_box(ControlField u, double lower, double upper);

double stationarity_residual(const Discretization& disc, const ControlField& u,
                             const GradientDensity& psi);

/// Projected gradient with Armijo backtracking on the Tikhonov-regularized
/// discrete problem.  Non-convergence is reported in the certificate and
/// report, never silently.
ControlSolution solve_control_problem(const Discretization& disc,
                                      const OptimizerConfig& config = {},
                                      const SolverOptions& solver = {},
                                      const ControlField* initial = nullptr);

/// Push elements with decisively signed gradient density to the bounds:
/// psi_T > tau -> lower bound, psi_T < -tau -> upper bound, else unchanged.
ControlField round_to_bounds(const ControlField& u, const GradientDensity& psi, double tau,
                             double lower, double upper, int* unchanged_count = nullptr);

}  // namespace bilopt
