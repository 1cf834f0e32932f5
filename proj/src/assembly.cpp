#include <bilopt/assembly.hpp>
#include <bilopt/quadrature.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace bilopt {

Nonlinearity zero_nonlinearity() {
  return {"zero", [](const Point&, double) { return 0.0; },
          [](const Point&, double) { return 0.0; }, [](const Point&, double) { return 0.0; }};
}

Nonlinearity linear_nonlinearity() {
  return {"linear", [](const Point&, double y) { return y; },
          [](const Point&, double) { return 1.0; }, [](const Point&, double) { return 0.0; }};
}

Nonlinearity cubic_nonlinearity() {
  return {"cubic", [](const Point&, double y) { return y * y * y; },
          [](const Point&, double y) { return 3.0 * y * y; },
          [](const Point&, double y) { return 6.0 * y; }};
}

Eigen::Matrix3d element_mass(double area) {
  Eigen::Matrix3d m;
  m << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  return (area / 12.0) * m;
}

Eigen::Matrix<double, 2, 3> hat_gradients(const Triangle& t, double area) {
  Eigen::Matrix<double, 2, 3> g;
  for (int i = 0; i < 3; ++i) {
    const Point& pj = t[(i + 1) % 3];
    const Point& pk = t[(i + 2) % 3];
    g(0, i) = (pj.y() - pk.y()) / (2.0 * area);
    g(1, i) = (pk.x() - pj.x()) / (2.0 * area);
  }
  return g;
}

SparseMatrix assemble_stiffness(const Mesh& mesh, const MatrixFn& diffusion,
                                const ScalarFn& reaction) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(mesh.element_count()) * 9);
  for (int t = 0; t < mesh.element_count(); ++t) {
    const Triangle tri = mesh.triangle(t);
    const double area = mesh.element_areas[t];
    const Point c = triangle_barycenter(tri);
    const Eigen::Matrix2d a = diffusion(c);
    const Eigen::Matrix2d sym = 0.5 * (a + a.transpose());
    const double tr = sym.trace();
    const double det = sym.determinant();
    const double lambda_min = 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
    if (lambda_min <= 0.0)
      throw std::invalid_argument("assemble_stiffness: coefficient matrix not elliptic");
    const auto g = hat_gradients(tri, area);
    const Eigen::Matrix3d diff = area * g.transpose() * a.transpose() * g;
    const Eigen::Matrix3d react = reaction(c) * element_mass(area);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trip.emplace_back(mesh.elements(t, i), mesh.elements(t, j), diff(i, j) + react(i, j));
  }
  SparseMatrix M(mesh.node_count(), mesh.node_count());
  M.setFromTriplets(trip.begin(), trip.end());
  M.makeCompressed();
  return M;
}

SparseMatrix assemble_mass(const Mesh& mesh) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(mesh.element_count()) * 9);
  for (int t = 0; t < mesh.element_count(); ++t) {
    const Eigen::Matrix3d m = element_mass(mesh.element_areas[t]);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trip.emplace_back(mesh.elements(t, i), mesh.elements(t, j), m(i, j));
  }
  SparseMatrix M(mesh.node_count(), mesh.node_count());
  M.setFromTriplets(trip.begin(), trip.end());
  M.makeCompressed();
  return M;
}

SparseMatrix assemble_control_coupling(const ControlField& u) {
  const ControlRegion& region = *u.region;
  const Mesh& mesh = *region.mesh;
  if (u.values.size() != region.count())
    throw std::invalid_argument("assemble_control_coupling: field/region size mismatch");
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(u.values.size() * 9);
  for (int k = 0; k < region.count(); ++k) {
    const int t = region.element_ids[k];
    const Eigen::Matrix3d m = u.values[k] * element_mass(mesh.element_areas[t]);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trip.emplace_back(mesh.elements(t, i), mesh.elements(t, j), m(i, j));
  }
  SparseMatrix M(mesh.node_count(), mesh.node_count());
  M.setFromTriplets(trip.begin(), trip.end());
  M.prune([](const Eigen::Index&, const Eigen::Index&, const double& v) { return v != 0.0; });
  M.makeCompressed();
  return M;
}

namespace {

void screen_monotone(const Nonlinearity& b, const Point& x, double y) {
  if (b.deriv(x, y) < 0.0)
    throw std::invalid_argument("semilinear term: derivative negative at a quadrature point");
}

}  // namespace

Vector assemble_semilinear_value(const Mesh& mesh, const Vector& y, const Nonlinearity& b) {
  Vector out = Vector::Zero(mesh.node_count());
  const auto rule = triangle_rule_order2();
  for (int t = 0; t < mesh.element_count(); ++t) {
    const Triangle tri = mesh.triangle(t);
    const double area = mesh.element_areas[t];
    const int n0 = mesh.elements(t, 0), n1 = mesh.elements(t, 1), n2 = mesh.elements(t, 2);
    for (const QuadPoint& q : rule) {
      const Point x = map_barycentric(tri, q);
      const double yq = q.l0 * y[n0] + q.l1 * y[n1] + q.l2 * y[n2];
      screen_monotone(b, x, yq);
      const double w = area * q.weight * b.value(x, yq);
      out[n0] += w * q.l0;
      out[n1] += w * q.l1;
      out[n2] += w * q.l2;
    }
  }
  return out;
}

SparseMatrix assemble_semilinear_derivative(const Mesh& mesh, const Vector& y,
                                            const Nonlinearity& b) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(mesh.element_count()) * 9);
  const auto rule = triangle_rule_order2();
  for (int t = 0; t < mesh.element_count(); ++t) {
    const Triangle tri = mesh.triangle(t);
    const double area = mesh.element_areas[t];
    const int n[3] = {mesh.elements(t, 0), mesh.elements(t, 1), mesh.elements(t, 2)};
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    for (const QuadPoint& q : rule) {
      const Point x = map_barycentric(tri, q);
      const double yq = q.l0 * y[n[0]] + q.l1 * y[n[1]] + q.l2 * y[n[2]];
      const double bp = b.deriv(x, yq);
      if (bp < 0.0)
        throw std::invalid_argument(
            "semilinear term: derivative negative at a quadrature point");
      const double w = area * q.weight * bp;
      const Eigen::Vector3d l(q.l0, q.l1, q.l2);
      m += w * l * l.transpose();
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.emplace_back(n[i], n[j], m(i, j));
  }
  SparseMatrix M(mesh.node_count(), mesh.node_count());
  M.setFromTriplets(trip.begin(), trip.end());
  M.prune([](const Eigen::Index&, const Eigen::Index&, const double& v) { return v != 0.0; });
  M.makeCompressed();
  return M;
}

Vector assemble_semilinear_second(const Mesh& mesh, const Vector& y, const Vector& z1,
                                  const Vector& z2, const Nonlinearity& b) {
  Vector out = Vector::Zero(mesh.node_count());
  const auto rule = triangle_rule_order2();
  for (int t = 0; t < mesh.element_count(); ++t) {
    const Triangle tri = mesh.triangle(t);
    const double area = mesh.element_areas[t];
    const int n[3] = {mesh.elements(t, 0), mesh.elements(t, 1), mesh.elements(t, 2)};
    for (const QuadPoint& q : rule) {
      const Point x = map_barycentric(tri, q);
      const double yq = q.l0 * y[n[0]] + q.l1 * y[n[1]] + q.l2 * y[n[2]];
      const double z1q = q.l0 * z1[n[0]] + q.l1 * z1[n[1]] + q.l2 * z1[n[2]];
      const double z2q = q.l0 * z2[n[0]] + q.l1 * z2[n[1]] + q.l2 * z2[n[2]];
      const double w = area * q.weight * b.second(x, yq) * (z1q * z2q);
      out[n[0]] += w * q.l0;
      out[n[1]] += w * q.l1;
      out[n[2]] += w * q.l2;
    }
  }
  return out;
}

Vector assemble_load(const Mesh& mesh, const ScalarFn& f, std::span<const Line> lines) {
  Vector out = Vector::Zero(mesh.node_count());
  const auto rule = triangle_rule_order4();
  for (int t = 0; t < mesh.element_count(); ++t) {
    const Triangle tri = mesh.triangle(t);
    const auto g = hat_gradients(tri, mesh.element_areas[t]);
    const int n[3] = {mesh.elements(t, 0), mesh.elements(t, 1), mesh.elements(t, 2)};
    // hat i as an affine function of x, evaluated on each sub-triangle
    for (const Triangle& s : split_by_lines(tri, lines)) {
      const double area = triangle_area(s);
      for (const QuadPoint& q : rule) {
        const Point x = map_barycentric(s, q);
        const double w = area * q.weight * f(x);
        for (int i = 0; i < 3; ++i) {
          const Point vi{mesh.nodes(n[i], 0), mesh.nodes(n[i], 1)};
          const double hat = 1.0 + g.col(i).dot(x - vi);
          out[n[i]] += w * hat;
        }
      }
    }
  }
  return out;
}

ControlField project_cell_averages(const ScalarFn& u, const ControlRegion& region,
                                   std::span<const Line> lines) {
  const Mesh& mesh = *region.mesh;
  ControlField out;
  out.region = &region;
  out.values.resize(region.count());
  const auto rule = triangle_rule_order4();
  for (int k = 0; k < region.count(); ++k) {
    const int t = region.element_ids[k];
    out.values[k] = integrate_split(u, mesh.triangle(t), lines, rule) / mesh.element_areas[t];
  }
  return out;
}

void eliminate_dirichlet(SparseMatrix& M, Vector& rhs, const std::vector<bool>& boundary,
                         const Vector* boundary_values) {
  const int n = static_cast<int>(M.rows());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(M.nonZeros()));
  for (int k = 0; k < M.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(M, k); it; ++it) {
      const int r = static_cast<int>(it.row());
      const int c = static_cast<int>(it.col());
      if (boundary[r]) continue;
      if (boundary[c]) {
        if (boundary_values) rhs[r] -= it.value() * (*boundary_values)[c];
        continue;
      }
      trip.emplace_back(r, c, it.value());
    }
  for (int i = 0; i < n; ++i)
    if (boundary[i]) {
      trip.emplace_back(i, i, 1.0);
      rhs[i] = boundary_values ? (*boundary_values)[i] : 0.0;
    }
  SparseMatrix out(n, n);
  out.setFromTriplets(trip.begin(), trip.end());
  out.makeCompressed();
  M = std::move(out);
}

FactorizedOperator::FactorizedOperator(SparseMatrix M) : matrix_(std::move(M)) {
  const SparseMatrix diff = SparseMatrix(matrix_.transpose()) - matrix_;
  double scale = 0.0;
  for (int k = 0; k < matrix_.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(matrix_, k); it; ++it)
      scale = std::max(scale, std::abs(it.value()));
  double asym = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it)
      asym = std::max(asym, std::abs(it.value()));
  symmetric_ = asym <= 1e-13 * std::max(scale, 1.0);
  if (symmetric_) {
    ldlt_.compute(matrix_);
    if (ldlt_.info() == Eigen::Success) {
      min_pivot_ = ldlt_.vectorD().minCoeff();
      if (min_pivot_ > 0.0) return;
    }
    symmetric_ = false;  // indefinite or failed: fall through to LU
  }
  lu_ = std::make_unique<Eigen::SparseLU<SparseMatrix>>();
  lu_->compute(matrix_);
  if (lu_->info() != Eigen::Success)
    throw std::runtime_error("FactorizedOperator: factorization failed (singular system?)");
  min_pivot_ = std::numeric_limits<double>::quiet_NaN();
}

Vector FactorizedOperator::checked(const Vector& x0, const Vector& rhs, bool transposed) const {
  // iterative refinement against the residual contract; the factorization
  // alone leaves eps*cond(M) behind on fine-mesh systems
  Vector x = x0;
  double rel = 0.0;
  for (int pass = 0; pass < 4; ++pass) {
    const Vector res =
        transposed ? Vector(matrix_.transpose() * x - rhs) : Vector(matrix_ * x - rhs);
    rel = res.norm() / std::max(rhs.norm(), 1e-300);
    if (rhs.norm() == 0.0 || rel <= 1e-12) return x;
    Vector correction;
    if (symmetric_)
      correction = ldlt_.solve(res);
    else if (transposed)
      correction = lu_transposed_->solve(res);
    else
      correction = lu_->solve(res);
    x -= correction;
  }
  const Vector res =
      transposed ? Vector(matrix_.transpose() * x - rhs) : Vector(matrix_ * x - rhs);
  rel = res.norm() / std::max(rhs.norm(), 1e-300);
  if (rel > 1e-11)
    throw std::runtime_error("sparse solve: relative residual " + std::to_string(rel) +
                             " exceeds tolerance (ill-conditioned or indefinite system)");
  return x;
}

Vector FactorizedOperator::solve(const Vector& rhs) const {
  if (symmetric_) return checked(ldlt_.solve(rhs), rhs, false);
  return checked(lu_->solve(rhs), rhs, false);
}

Vector FactorizedOperator::solve_transposed(const Vector& rhs) const {
  if (symmetric_) return checked(ldlt_.solve(rhs), rhs, true);
  if (!lu_transposed_) {
    lu_transposed_ = std::make_unique<Eigen::SparseLU<SparseMatrix>>();
    lu_transposed_->compute(SparseMatrix(matrix_.transpose()));
    if (lu_transposed_->info() != Eigen::Success)
      throw std::runtime_error("FactorizedOperator: transpose factorization failed");
  }
  return checked(lu_transposed_->solve(rhs), rhs, true);
}

Vector solve_sparse(const SparseMatrix& M, const Vector& rhs, SparseSolveInfo* info) {
  if (M.rows() != M.cols() || M.rows() != rhs.size())
    throw std::invalid_argument("solve_sparse: dimension mismatch");
  FactorizedOperator op(M);
  Vector x = op.solve(rhs);
  if (info) {
    info->residual = (M * x - rhs).norm();
    info->min_pivot = op.min_pivot();
    info->direct = true;
  }
  return x;
}

}  // namespace bilopt
