#include <bilopt/pde.hpp>

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace bilopt {

namespace {

constexpr double kNudge = 9.313225746154785e-10;  // 2^-30

bool on_a_jump_line(const Point& p, std::span<const Line> lines, double scale) {
  for (const Line& line : lines)
    if (std::abs(line.signed_distance(p)) <= 1e-12 * scale) return true;
  return false;
}

}  // namespace

Discretization discretize(const ProblemSpec& spec, const Mesh& mesh) {
  if (!(spec.lower_bound >= 0.0 && spec.lower_bound < spec.upper_bound))
    throw std::invalid_argument("discretize: bounds must satisfy 0 <= alpha < beta");
  if (spec.tikhonov_factor < 0.0)
    throw std::invalid_argument("discretize: Tikhonov factor must be >= 0");

  Discretization disc;
  disc.mesh = &mesh;
  disc.spec = spec;
  disc.region = extract_control_region(mesh, spec.control_box);
  disc.tikhonov = spec.tikhonov_factor * mesh.h;
  disc.stiffness = assemble_stiffness(mesh, spec.diffusion, spec.reaction);
  disc.mass = assemble_mass(mesh);
  disc.load = assemble_load(mesh, spec.source, spec.jump_lines);

  // A2 screen at barycenters: b(.,0) = 0 and b'(.,0) >= 0.
  double ellipticity = std::numeric_limits<double>::max();
  const double scale = std::max({1.0, mesh.domain.width(), mesh.domain.height()});
  for (int t = 0; t < mesh.element_count(); ++t) {
    const Point c = mesh.barycenter(t);
    if (std::abs(spec.semilinear.value(c, 0.0)) > 1e-14)
      throw std::invalid_argument("discretize: nonlinearity does not vanish at y = 0");
    if (spec.semilinear.deriv(c, 0.0) < 0.0)
      throw std::invalid_argument("discretize: nonlinearity has negative derivative");
    const Eigen::Matrix2d a = spec.diffusion(c);
    const Eigen::Matrix2d sym = 0.5 * (a + a.transpose());
    const double tr = sym.trace(), det = sym.determinant();
    ellipticity =
        std::min(ellipticity, 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4.0 * det))));
  }
  disc.ellipticity = ellipticity;

  disc.target_nodal.resize(mesh.element_count(), 3);
  for (int t = 0; t < mesh.element_count(); ++t) {
    const Triangle tri = mesh.triangle(t);
    const Point c = triangle_barycenter(tri);
    for (int i = 0; i < 3; ++i) {
      Point p = tri[i];
      if (on_a_jump_line(p, spec.jump_lines, scale)) p += kNudge * (c - p);
      disc.target_nodal(t, i) = spec.target(p);
    }
  }
  return disc;
}

Vector tracking_residual(const Discretization& disc, const Vector& y) {
  const Mesh& mesh = *disc.mesh;
  Vector out = Vector::Zero(mesh.node_count());
  for (int t = 0; t < mesh.element_count(); ++t) {
    const Eigen::Matrix3d m = element_mass(mesh.element_areas[t]);
    Eigen::Vector3d diff;
    for (int i = 0; i < 3; ++i) diff[i] = y[mesh.elements(t, i)] - disc.target_nodal(t, i);
    const Eigen::Vector3d local = m * diff;
    for (int i = 0; i < 3; ++i) out[mesh.elements(t, i)] += local[i];
  }
  return out;
}

double tracking_value(const Discretization& disc, const Vector& y) {
  const Mesh& mesh = *disc.mesh;
  double sum = 0.0;
  for (int t = 0; t < mesh.element_count(); ++t) {
    const Eigen::Matrix3d m = element_mass(mesh.element_areas[t]);
    Eigen::Vector3d diff;
    for (int i = 0; i < 3; ++i) diff[i] = y[mesh.elements(t, i)] - disc.target_nodal(t, i);
    sum += diff.dot(m * diff);
  }
  return 0.5 * sum;
}

namespace {

Vector state_residual(const Discretization& disc, const SparseMatrix& coupling,
                      const Vector& y) {
  const Mesh& mesh = *disc.mesh;
  Vector r = disc.stiffness * y + coupling * y +
             assemble_semilinear_value(mesh, y, disc.spec.semilinear) - disc.load;
  for (int i : mesh.boundary_nodes) r[i] = y[i];
  return r;
}

SparseMatrix eliminated_jacobian(const Discretization& disc, const SparseMatrix& coupling,
                                 const Vector& y) {
  const Mesh& mesh = *disc.mesh;
  SparseMatrix jac =
      disc.stiffness + coupling + assemble_semilinear_derivative(mesh, y, disc.spec.semilinear);
  Vector dummy = Vector::Zero(mesh.node_count());
  eliminate_dirichlet(jac, dummy, mesh.boundary_flag);
  return jac;
}

Vector eliminated(const Mesh& mesh, Vector v) {
  for (int i : mesh.boundary_nodes) v[i] = 0.0;
  return v;
}

void check_admissible(const Discretization& disc, const ControlField& u) {
  if (u.region != &disc.region)
    throw std::invalid_argument("control field does not live on this discretization's region");
  const double tol = 1e-12;
  if (u.values.size() > 0 && (u.values.minCoeff() < disc.spec.lower_bound - tol ||
                              u.values.maxCoeff() > disc.spec.upper_bound + tol))
    throw std::invalid_argument("control field violates the box constraints");
}

}  // namespace

SparseMatrix state_jacobian(const Discretization& disc, const ControlField& u,
                            const Vector& y) {
  return eliminated_jacobian(disc, assemble_control_coupling(u), y);
}

StateSolution solve_state(const Discretization& disc, const ControlField& u,
                          const SolverOptions& options, const Vector* initial) {
  check_admissible(disc, u);
  const auto t0 = std::chrono::steady_clock::now();
  const Mesh& mesh = *disc.mesh;
  const SparseMatrix coupling = assemble_control_coupling(u);

  Vector y = initial ? eliminated(mesh, *initial) : Vector::Zero(mesh.node_count());
  const double scale = 1.0 + eliminated(mesh, disc.load).norm();

  StateSolution sol;
  Vector r = state_residual(disc, coupling, y);
  double rnorm = r.norm();
  sol.report.residual_history.push_back(rnorm);

  int iter = 0;
  while (rnorm > options.newton_tol * scale) {
    if (iter >= options.newton_max) {
      throw std::runtime_error("solve_state: Newton did not converge in " +
                               std::to_string(options.newton_max) +
                               " iterations, residual " + std::to_string(rnorm));
    }
    auto op = std::make_shared<FactorizedOperator>(eliminated_jacobian(disc, coupling, y));
    const Vector step = op->solve(eliminated(mesh, -r));
    double s = 1.0;
    Vector y_trial = y + step;
    Vector r_trial = state_residual(disc, coupling, y_trial);
    double rnorm_trial = r_trial.norm();
    for (int d = 0; d < options.damping_max && rnorm_trial >= rnorm; ++d) {
      s *= 0.5;
      y_trial = y + s * step;
      r_trial = state_residual(disc, coupling, y_trial);
      rnorm_trial = r_trial.norm();
    }
    y = std::move(y_trial);
    r = std::move(r_trial);
    rnorm = rnorm_trial;
    sol.jacobian = std::move(op);
    sol.report.residual_history.push_back(rnorm);
    ++iter;
  }

  if (!sol.jacobian)  // converged without a step; factorize for downstream use
    sol.jacobian = std::make_shared<FactorizedOperator>(eliminated_jacobian(disc, coupling, y));

  sol.y.mesh = &mesh;
  sol.y.values = std::move(y);
  sol.report.iterations = iter;
  sol.report.residual = rnorm;
  sol.report.converged = true;
  sol.report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

namespace {

// Jacobian factorization at (u, y), freshly computed when none was supplied.
struct JacobianHandle {
  std::unique_ptr<FactorizedOperator> owned;
  const FactorizedOperator* op;
  JacobianHandle(const Discretization& disc, const ControlField& u, const Vector& y,
                 const FactorizedOperator* given) {
    if (given) {
      op = given;
    } else {
      owned = std::make_unique<FactorizedOperator>(
          eliminated_jacobian(disc, assemble_control_coupling(u), y));
      op = owned.get();
    }
  }
};

}  // namespace

StateField solve_adjoint(const Discretization& disc, const ControlField& u,
                         const StateField& y, const FactorizedOperator* jacobian) {
  const Mesh& mesh = *disc.mesh;
  JacobianHandle jac(disc, u, y.values, jacobian);
  const Vector rhs = eliminated(mesh, tracking_residual(disc, y.values));
  StateField phi;
  phi.mesh = &mesh;
  phi.values = jac.op->solve_transposed(rhs);
  return phi;
}

StateField solve_linearized(const Discretization& disc, const ControlField& u,
                            const StateField& y, const ControlField& v,
                            const FactorizedOperator* jacobian) {
  const Mesh& mesh = *disc.mesh;
  JacobianHandle jac(disc, u, y.values, jacobian);
  const SparseMatrix cv = assemble_control_coupling(v);
  const Vector rhs = eliminated(mesh, Vector(-(cv * y.values)));
  StateField z;
  z.mesh = &mesh;
  z.values = jac.op->solve(rhs);
  return z;
}

StateField solve_second_sensitivity(const Discretization& disc, const ControlField& u,
                                    const StateField& y, const ControlField& v1,
                                    const ControlField& v2, const StateField& z1,
                                    const StateField& z2,
                                    const FactorizedOperator* jacobian) {
  const Mesh& mesh = *disc.mesh;
  JacobianHandle jac(disc, u, y.values, jacobian);
  const Vector bpp =
      assemble_semilinear_second(mesh, y.values, z1.values, z2.values, disc.spec.semilinear);
  const Vector t1 = assemble_control_coupling(v1) * z2.values;
  const Vector t2 = assemble_control_coupling(v2) * z1.values;
  const Vector rhs = eliminated(mesh, Vector(-(bpp + (t1 + t2))));
  StateField w;
  w.mesh = &mesh;
  w.values = jac.op->solve(rhs);
  return w;
}

StateField solve_second_sensitivity(const Discretization& disc, const ControlField& u,
                                    const StateField& y, const ControlField& v1,
                                    const ControlField& v2,
                                    const FactorizedOperator* jacobian) {
  JacobianHandle jac(disc, u, y.values, jacobian);
  const StateField z1 = solve_linearized(disc, u, y, v1, jac.op);
  const StateField z2 = solve_linearized(disc, u, y, v2, jac.op);
  return solve_second_sensitivity(disc, u, y, v1, v2, z1, z2, jac.op);
}

}  // namespace bilopt
