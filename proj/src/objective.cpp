#include <bilopt/objective.hpp>

#include <cmath>

namespace bilopt {

namespace {

double tikhonov_term(const Discretization& disc, const ControlField& u, double alpha_h) {
  if (alpha_h == 0.0) return 0.0;
  double sum = 0.0;
  const ControlRegion& region = disc.region;
  for (int k = 0; k < region.count(); ++k)
    sum += region.mesh->element_areas[region.element_ids[k]] * u.values[k] * u.values[k];
  return 0.5 * alpha_h * sum;
}

}  // namespace

double objective_value_at(const Discretization& disc, const ControlField& u,
                          const StateField& y) {
  return tracking_value(disc, y.values) + tikhonov_term(disc, u, disc.tikhonov);
}

double objective_value(const Discretization& disc, const ControlField& u,
                       const SolverOptions& options, const Vector* warm_start) {
  const StateSolution sol = solve_state(disc, u, options, warm_start);
  return objective_value_at(disc, u, sol.y);
}

GradientDensity gradient_from_fields(const Discretization& disc, const ControlField& u,
                                     const StateField& y, const StateField& phi,
                                     double tikhonov) {
  const ControlRegion& region = disc.region;
  const Mesh& mesh = *disc.mesh;
  GradientDensity out;
  out.density.region = &region;
  out.density.values.resize(region.count());
  out.includes_tikhonov = tikhonov != 0.0;
  for (int k = 0; k < region.count(); ++k) {
    const int t = region.element_ids[k];
    const Eigen::Matrix3d m = element_mass(mesh.element_areas[t]);
    Eigen::Vector3d yv, pv;
    for (int i = 0; i < 3; ++i) {
      yv[i] = y.values[mesh.elements(t, i)];
      pv[i] = phi.values[mesh.elements(t, i)];
    }
    const double mean_phi_y = pv.dot(m * yv) / mesh.element_areas[t];
    out.density.values[k] = -mean_phi_y + tikhonov * u.values[k];
  }
  return out;
}

GradientDensity objective_gradient(const Discretization& disc, const ControlField& u,
                                   const SolverOptions& options) {
  const StateSolution sol = solve_state(disc, u, options);
  const StateField phi = solve_adjoint(disc, u, sol.y, sol.jacobian.get());
  return gradient_from_fields(disc, u, sol.y, phi, disc.tikhonov);
}

double gradient_pairing(const GradientDensity& psi, const ControlField& v) {
  return control_inner(psi.density, v);
}

HessianEvaluator::HessianEvaluator(const Discretization& disc, const ControlField& u,
                                   double tikhonov, const SolverOptions& options)
    : disc_(disc),
      u_(u),
      tikhonov_(tikhonov),
      state_(solve_state(disc, u, options)),
      adjoint_(solve_adjoint(disc, u, state_.y, state_.jacobian.get())),
      tracking_residual_(tracking_residual(disc, state_.y.values)) {}

StateField HessianEvaluator::linearized(const ControlField& v) const {
  return solve_linearized(disc_, u_, state_.y, v, state_.jacobian.get());
}

HessianPair HessianEvaluator::form(const ControlField& v1, const ControlField& v2) const {
  const Mesh& mesh = *disc_.mesh;
  const StateField z1 = linearized(v1);
  const StateField z2 = linearized(v2);
  const double z_mass_z = z1.values.dot(disc_.mass * z2.values);
  const double tik = tikhonov_ == 0.0 ? 0.0 : tikhonov_ * control_inner(v1, v2);

  HessianPair out;

  // route 1: 1/2-tracking second derivative through the second sensitivity
  const StateField w =
      solve_second_sensitivity(disc_, u_, state_.y, v1, v2, z1, z2, state_.jacobian.get());
  out.via_sensitivity = z_mass_z + tracking_residual_.dot(w.values) + tik;

  // route 2: adjoint-based formula evaluated with discrete fields
  const Vector bpp = assemble_semilinear_second(mesh, state_.y.values, z1.values, z2.values,
                                                disc_.spec.semilinear);
  const Vector t1 = assemble_control_coupling(v1) * z2.values;
  const Vector t2 = assemble_control_coupling(v2) * z1.values;
  out.via_adjoint =
      z_mass_z - adjoint_.values.dot(bpp) - adjoint_.values.dot(t1 + t2) + tik;
  return out;
}

HessianPair objective_hessian_form(const Discretization& disc, const ControlField& u,
                                   const ControlField& v1, const ControlField& v2,
                                   const SolverOptions& options) {
  return HessianEvaluator(disc, u, disc.tikhonov, options).form(v1, v2);
}

}  // namespace bilopt
