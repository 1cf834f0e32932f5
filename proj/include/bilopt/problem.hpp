#pragma once

#include <bilopt/fields.hpp>
#include <bilopt/mesh.hpp>
#include <bilopt/types.hpp>

#include <string>
#include <vector>

namespace bilopt {

/// Monotone nonlinearity b(x, y) with its first two y-derivatives.
/// Requirements: b(x, 0) = 0 and d/dy b >= 0 everywhere.
struct Nonlinearity {
  std::string name;
  std::function<double(const Point&, double)> value;
  std::function<double(const Point&, double)> deriv;
  std::function<double(const Point&, double)> second;
};

Nonlinearity zero_nonlinearity();
Nonlinearity linear_nonlinearity();  // b(x,y) = y
Nonlinearity cubic_nonlinearity();   // b(x,y) = y^3

/// Data of the distributed bilinear control problem
///   A y + b(.,y) + chi_omega u y = f,  y = 0 on the boundary,
///   minimize 1/2 |y - y_d|^2 + alpha_h/2 |u|^2 over alpha <= u <= beta.
struct ProblemSpec {
  MatrixFn diffusion = [](const Point&) { return Eigen::Matrix2d::Identity().eval(); };
  ScalarFn reaction = [](const Point&) { return 0.0; };
  Nonlinearity semilinear = zero_nonlinearity();
  ScalarFn source = [](const Point&) { return 0.0; };
  ScalarFn target = [](const Point&) { return 0.0; };
  Rect control_box{0.25, 0.25, 0.75, 0.75};
  double lower_bound = 0.0;
  double upper_bound = 1.0;
  /// Tikhonov schedule alpha_h = tikhonov_factor * h.
  double tikhonov_factor = 1.0;
  /// Straight lines across which source/target may jump; quadrature splits there.
  std::vector<Line> jump_lines;
};

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  double wall_time_s = 0.0;
  std::vector<double> residual_history;
};

struct SolverOptions {
  double newton_tol = 1e-10;
  int newton_max = 50;
  int damping_max = 10;
  double linear_tol = 1e-11;
};

}  // namespace bilopt
