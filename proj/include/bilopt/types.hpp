#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <functional>

namespace bilopt {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;
using Point = Eigen::Vector2d;

/// Scalar field evaluable anywhere in the domain.
using ScalarFn = std::function<double(const Point&)>;
/// 2x2 coefficient matrix field (diffusion tensor).
using MatrixFn = std::function<Eigen::Matrix2d(const Point&)>;

/// Axis-aligned rectangle (x_min,x_max) x (y_min,y_max).
struct Rect {
  double x_min = 0, y_min = 0, x_max = 1, y_max = 1;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  bool contains(const Point& p, double tol = 0.0) const {
    return p.x() >= x_min - tol && p.x() <= x_max + tol && p.y() >= y_min - tol &&
           p.y() <= y_max + tol;
  }
  /// Closure strictly inside the open rectangle `outer`.
  bool strictly_inside(const Rect& outer) const {
    return x_min > outer.x_min && x_max < outer.x_max && y_min > outer.y_min &&
           y_max < outer.y_max;
  }
};

/// Straight line n.x = offset; signed distance is n.x - offset (n unit).
struct Line {
  Point normal{1, 0};
  double offset = 0;

  double signed_distance(const Point& p) const { return normal.dot(p) - offset; }
  static Line vertical(double x) { return {{1, 0}, x}; }
  static Line horizontal(double y) { return {{0, 1}, y}; }
};

}  // namespace bilopt
