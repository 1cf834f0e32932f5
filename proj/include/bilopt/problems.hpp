#pragma once

#include <bilopt/pde.hpp>
#include <bilopt/problem.hpp>

namespace bilopt {

enum class ManufacturedKind { Linear, Cubic };

/// Test problem with closed-form stationary data on the unit square with
/// control rectangle (1/4,3/4)^2:
///   state    sin(pi x1) sin(pi x2)
///   adjoint  c sin(pi x1) sin(pi x2) (x1 - 1/2)
///   density  -c sin^2(pi x1) sin^2(pi x2) (x1 - 1/2)
/// The control is bang-bang with switching line x1 = 1/2 (lower bound left of
/// it), and source/target are defined so the state and adjoint equations hold
/// with that control.
struct ManufacturedProblem {
  ProblemSpec spec;
  ManufacturedKind kind = ManufacturedKind::Cubic;
  double amplitude = 1.0;
  ScalarFn state_exact;
  ScalarFn adjoint_exact;
  ScalarFn density_exact;  // switching density on the control rectangle
  ScalarFn control_exact;
  Line switch_line;
};

ManufacturedProblem make_manufactured_problem(ManufacturedKind kind, double amplitude,
                                              double lower, double upper);

/// |u_exact - u_h| in L1(omega_h): elements crossed by the switching line are
/// split by exact clipping, others use the plain closed form.
double control_error_l1(const ManufacturedProblem& mp, const ControlField& u);

/// Cell averages of the exact bang-bang control on the region.
ControlField exact_control_field(const ManufacturedProblem& mp, const ControlRegion& region);

/// max |psi| of the manufactured density over the control rectangle.
double density_max(const ManufacturedProblem& mp);

}  // namespace bilopt
