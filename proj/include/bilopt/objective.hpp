#pragma once

#include <bilopt/pde.hpp>

namespace bilopt {

/// Gradient density of the reduced objective: per control element
/// psi_T = -(1/|T|) int_T phi y + alpha_h u_T (last term when flagged).
struct GradientDensity {
  ControlField density;
  bool includes_tikhonov = true;
};

/// J_h(u) = 1/2 |y(u) - y_d|^2 + alpha_h/2 |u|^2_{omega_h}.
double objective_value(const Discretization& disc, const ControlField& u,
                       const SolverOptions& options = {}, const Vector* warm_start = nullptr);

/// Same, given the already-solved state for u.
double objective_value_at(const Discretization& disc, const ControlField& u,
                          const StateField& y);

GradientDensity objective_gradient(const Discretization& disc, const ControlField& u,
                                   const SolverOptions& options = {});

/// Gradient density from already-solved state and adjoint.
GradientDensity gradient_from_fields(const Discretization& disc, const ControlField& u,
                                     const StateField& y, const StateField& phi,
                                     double tikhonov);

/// J'(u) v = sum_T psi_T v_T |T|.
double gradient_pairing(const GradientDensity& psi, const ControlField& v);

/// The second-derivative quadratic form computed two ways: via the second
/// sensitivity w (exact second derivative of the discrete objective) and via
/// the adjoint-based formula; both include the Tikhonov part alpha_h (v1, v2).
struct HessianPair {
  double via_sensitivity = 0.0;
  double via_adjoint = 0.0;
};

/// Evaluates objective second-derivative forms at a fixed control, reusing the
/// state solve and Jacobian factorization across directions.
class HessianEvaluator {
 public:
  HessianEvaluator(const Discretization& disc, const ControlField& u, double tikhonov,
                   const SolverOptions& options = {});

  const StateField& state() const { return state_.y; }
  const StateField& adjoint() const { return adjoint_; }
  double tikhonov() const { return tikhonov_; }

  StateField linearized(const ControlField& v) const;
  HessianPair form(const ControlField& v1, const ControlField& v2) const;

 private:
  const Discretization& disc_;
  ControlField u_;
  double tikhonov_;
  StateSolution state_;
  StateField adjoint_;
  Vector tracking_residual_;
};

HessianPair objective_hessian_form(const Discretization& disc, const ControlField& u,
                                   const ControlField& v1, const ControlField& v2,
                                   const SolverOptions& options = {});

}  // namespace bilopt
