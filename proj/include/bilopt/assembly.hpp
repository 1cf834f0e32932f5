#pragma once

#include <bilopt/fields.hpp>
#include <bilopt/mesh.hpp>
#include <bilopt/problem.hpp>
#include <bilopt/types.hpp>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <memory>
#include <optional>

namespace bilopt {

/// Element mass matrix |T|/12 [[2,1,1],[1,2,1],[1,1,2]].
Eigen::Matrix3d element_mass(double area);

/// Gradients of the three hat functions on a triangle (columns).
Eigen::Matrix<double, 2, 3> hat_gradients(const Triangle& t, double area);

/// Matrix of the form a(., .): sum a_ij dphi dphi + a0 phi phi, coefficients
/// evaluated at element barycenters.  Rejects coefficient matrices whose
/// symmetric part has an eigenvalue <= 0 at any barycenter.
SparseMatrix assemble_stiffness(const Mesh& mesh, const MatrixFn& diffusion,
                                const ScalarFn& reaction);

/// Exact P1 mass matrix over the whole mesh.
SparseMatrix assemble_mass(const Mesh& mesh);

/// Entries int_{omega_h} u phi_j phi_i, closed form per element.
SparseMatrix assemble_control_coupling(const ControlField& u);

/// int b(., y) phi_i, 3-point order-2 Gauss per element.  The derivative
/// d/dy b is screened at every quadrature point; negative values are rejected.
Vector assemble_semilinear_value(const Mesh& mesh, const Vector& y, const Nonlinearity& b);

/// int b'(., y) phi_j phi_i, same rule (exact Jacobian of the value vector).
SparseMatrix assemble_semilinear_derivative(const Mesh& mesh, const Vector& y,
                                            const Nonlinearity& b);

/// int b''(., y) z1 z2 phi_i, same rule.
Vector assemble_semilinear_second(const Mesh& mesh, const Vector& y, const Vector& z1,
                                  const Vector& z2, const Nonlinearity& b);

/// Load vector int f phi_i, order-4 quadrature split along the jump lines.
Vector assemble_load(const Mesh& mesh, const ScalarFn& f, std::span<const Line> lines = {});

/// Cell averages (1/|T|) int_T u of a function onto the control elements;
/// order-4 quadrature, split along declared discontinuity lines so piecewise
/// constants are averaged exactly.
ControlField project_cell_averages(const ScalarFn& u, const ControlRegion& region,
                                   std::span<const Line> lines = {});

/// Homogeneous (or given-value) Dirichlet elimination: boundary rows/columns
/// are removed symmetrically, unit diagonal inserted, right-hand side updated.
void eliminate_dirichlet(SparseMatrix& M, Vector& rhs, const std::vector<bool>& boundary,
                         const Vector* boundary_values = nullptr);

struct SparseSolveInfo {
  double residual = 0.0;
  double min_pivot = 0.0;
  bool direct = true;
};

/// Factorization wrapper reusable across right-hand sides; LDLT for symmetric
/// matrices, sparse LU otherwise (transpose solves factor the transpose).
class FactorizedOperator {
 public:
  explicit FactorizedOperator(SparseMatrix M);

  Vector solve(const Vector& rhs) const;
  Vector solve_transposed(const Vector& rhs) const;
  const SparseMatrix& matrix() const { return matrix_; }
  bool symmetric() const { return symmetric_; }
  double min_pivot() const { return min_pivot_; }

 private:
  SparseMatrix matrix_;
  bool symmetric_ = false;
  double min_pivot_ = 0.0;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
  std::unique_ptr<Eigen::SparseLU<SparseMatrix>> lu_;
  mutable std::unique_ptr<Eigen::SparseLU<SparseMatrix>> lu_transposed_;
  Vector checked(const Vector& x, const Vector& rhs, bool transposed) const;
};

/// Direct solve with residual verification |Mx - rhs| <= 1e-11 |rhs|.
Vector solve_sparse(const SparseMatrix& M, const Vector& rhs, SparseSolveInfo* info = nullptr);

}  // namespace bilopt
