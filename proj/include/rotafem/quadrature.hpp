#pragma once

#include "rotafem/types.hpp"

#include <vector>

namespace rotafem {

/// Quadrature on the reference triangle {(x, y) : x, y >= 0, x + y <= 1}.
/// Points are stored as reference coordinates; weights sum to 1/2.
struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int order = 0;

  std::size_t size() const { return weights.size(); }
  /// Barycentric coordinates (1 - x - y, x, y) of point q.
  Eigen::Vector3d barycentric(std::size_t q) const {
    return {1.0 - points[q].x() - points[q].y(), points[q].x(), points[q].y()};
  }
};

/// Gauss-Legendre rule on [0, 1] with n points (exact to degree 2n - 1).
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
};

LineRule gauss_legendre(int n);

/// Rule of the given order (1..12), exact for total degree <= order.
/// Orders 1, 2 and 3-5 use the centroid, the three-point and the seven-point
/// symmetric rules; higher orders use a collapsed Gauss product rule.
const QuadratureRule& quadrature_rule(int order);

/// Edge rule on [0, 1] exact to the requested polynomial degree.
const LineRule& edge_rule(int order);

}  // namespace rotafem
