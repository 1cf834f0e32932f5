#pragma once

#include <bilopt/assembly.hpp>
#include <bilopt/fields.hpp>
#include <bilopt/mesh.hpp>
#include <bilopt/problem.hpp>

#include <memory>

namespace bilopt {

/// A ProblemSpec bound to a mesh: control region, matrices and vectors that do
/// not depend on the control, and the per-element interpolant of the tracking
/// target.  The target is interpolated element-by-element (vertices on a
/// declared jump line are nudged toward the barycenter before evaluation), so
/// every integrand in the objective chain is a polynomial of degree <= 2 per
/// element and the order-2 rule integrates it exactly.
struct Discretization {
  const Mesh* mesh = nullptr;
  ProblemSpec spec;
  ControlRegion region;
  double tikhonov = 0.0;  // alpha_h = tikhonov_factor * h
  SparseMatrix stiffness;
  SparseMatrix mass;
  Vector load;
  Eigen::Matrix<double, Eigen::Dynamic, 3> target_nodal;  // row per element
  double ellipticity = 0.0;  // min eigenvalue of sym(diffusion) over barycenters
};

Discretization discretize(const ProblemSpec& spec, const Mesh& mesh);

/// Residual of the tracking term, (d/dy) 1/2 |y - y_d|^2 with the per-element
/// target interpolant; also the adjoint right-hand side before elimination.
Vector tracking_residual(const Discretization& disc, const Vector& y);

/// 1/2 |y - y_d|^2 with the same interpolant (exact for the order-2 rule).
double tracking_value(const Discretization& disc, const Vector& y);

struct StateSolution {
  StateField y;
  SolveReport report;
  /// Factorization of the eliminated Jacobian at the returned state; the
  /// adjoint operator is its transpose.
  std::shared_ptr<const FactorizedOperator> jacobian;
};

/// Newton solve of a(y,z) + (b(.,y), z) + (u y, z)_{omega_h} = (f, z), y=0 on
/// the boundary.  Zero initial guess unless one is passed; step halving up to
/// options.damping_max when the residual does not decrease.  Throws after
/// options.newton_max iterations without convergence.
StateSolution solve_state(const Discretization& disc, const ControlField& u,
                          const SolverOptions& options = {}, const Vector* initial = nullptr);

/// Discrete adjoint: transpose of the state Jacobian at y, tracking residual
/// as right-hand side.
StateField solve_adjoint(const Discretization& disc, const ControlField& u,
                         const StateField& y, const FactorizedOperator* jacobian = nullptr);

/// Derivative of the control-to-state map in direction v.
StateField solve_linearized(const Discretization& disc, const ControlField& u,
                            const StateField& y, const ControlField& v,
                            const FactorizedOperator* jacobian = nullptr);

/// Second derivative of the control-to-state map in directions (v1, v2),
/// given their first-order sensitivities z1, z2.
StateField solve_second_sensitivity(const Discretization& disc, const ControlField& u,
                                    const StateField& y, const ControlField& v1,
                                    const ControlField& v2, const StateField& z1,
                                    const StateField& z2,
                                    const FactorizedOperator* jacobian = nullptr);

/// Same, solving the two linearized problems internally.
StateField solve_second_sensitivity(const Discretization& disc, const ControlField& u,
                                    const StateField& y, const ControlField& v1,
                                    const ControlField& v2,
                                    const FactorizedOperator* jacobian = nullptr);

/// Eliminated Jacobian of the state residual at y (stiffness + b' + coupling).
SparseMatrix state_jacobian(const Discretization& disc, const ControlField& u,
                            const Vector& y);

}  // namespace bilopt
