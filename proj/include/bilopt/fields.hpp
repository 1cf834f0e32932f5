#pragma once

#include <bilopt/mesh.hpp>
#include <bilopt/types.hpp>

#include <span>

namespace bilopt {

/// Piecewise-linear scalar field, one value per mesh node.  Fields living in
/// the homogeneous Dirichlet space carry exact zeros at boundary nodes.
struct StateField {
  const Mesh* mesh = nullptr;
  Vector values;
};

/// Piecewise-constant field on the control elements, one value per element of
/// the region.
struct ControlField {
  const ControlRegion* region = nullptr;
  Vector values;
};

ControlField constant_control(const ControlRegion& region, double value);

/// Value of the P1 field inside element t at point p (barycentric interpolation).
double interpolate_in_element(const Mesh& mesh, const Vector& nodal, int t, const Point& p);

/// L2(domain) distance between the P1 field and a reference function,
/// order-4 quadrature split along the given lines.
double l2_error(const Mesh& mesh, const Vector& nodal, const ScalarFn& exact,
                std::span<const Line> lines = {});

/// Max |field - exact| sampled at vertices, barycenters and order-4 points.
double linf_error(const Mesh& mesh, const Vector& nodal, const ScalarFn& exact);

double l1_norm(const ControlField& u);
double lq_norm(const ControlField& u, double q);
/// sum_T |T| a_T b_T
double control_inner(const ControlField& a, const ControlField& b);

}  // namespace bilopt
