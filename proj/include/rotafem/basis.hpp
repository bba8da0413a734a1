#pragma once

#include "rotafem/types.hpp"

#include <array>
#include <vector>

namespace rotafem {

/// Scalar Lagrange basis of degree 0, 1 or 2 on the reference triangle.
/// Node order: vertices 0, 1, 2 at (0,0), (1,0), (0,1), then (degree 2) the
/// midpoints of the edges opposite vertex 0, 1 and 2.
class LagrangeBasis {
 public:
  explicit LagrangeBasis(int degree);

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<Vec2>& nodes() const { return nodes_; }

  void values(const Vec2& xi, double* out) const;
  /// Reference gradients, out[i] = d phi_i / d(xi, eta).
  void gradients(const Vec2& xi, Vec2* out) const;
  /// Reference Hessians (constant for every supported degree).
  void hessians(const Vec2& xi, Mat2* out) const;

 private:
  int degree_;
  std::vector<Vec2> nodes_;
};

const LagrangeBasis& lagrange_basis(int degree);

inline int lagrange_dim(int degree) { return (degree + 1) * (degree + 2) / 2; }

/// Reference values, gradients and Hessians of one basis at a point set.
/// Entry (q, i) is stored at q * size + i.
struct BasisTable {
  int size = 0;
  int points = 0;
  std::vector<double> value;
  std::vector<Vec2> grad;
  std::vector<Mat2> hess;

  double v(int q, int i) const { return value[q * size + i]; }
  const Vec2& g(int q, int i) const { return grad[q * size + i]; }
  const Mat2& h(int q, int i) const { return hess[q * size + i]; }
};

BasisTable tabulate(int degree, const std::vector<Vec2>& points);

/// Affine map x = x0 + B xi of one mesh cell.
struct AffineMap {
  Vec2 origin;
  Mat2 jacobian;
  Mat2 inverse_transpose;
  double det = 0.0;

  AffineMap() = default;
  AffineMap(const Vec2& a, const Vec2& b, const Vec2& c);

  Vec2 to_physical(const Vec2& xi) const { return origin + jacobian * xi; }
  Vec2 to_reference(const Vec2& x) const { return inverse_transpose.transpose() * (x - origin); }
  Vec2 grad(const Vec2& ref_grad) const { return inverse_transpose * ref_grad; }
  Mat2 hessian(const Mat2& ref_hess) const {
    return inverse_transpose * ref_hess * inverse_transpose.transpose();
  }
  double area() const { return 0.5 * std::abs(det); }
};

// Two-dimensional differential operators on a vector field given by its
// gradient G (G(i, j) = d v_i / d x_j) and on a scalar gradient g.
inline double curl_of_vector(const Mat2& G) { return G(1, 0) - G(0, 1); }
inline double div_of_vector(const Mat2& G) { return G(0, 0) + G(1, 1); }
inline Vec2 curl_of_scalar(const Vec2& g) { return {g.y(), -g.x()}; }
/// theta x n for an out-of-plane scalar theta.
inline Vec2 cross_normal(double theta, const Vec2& n) { return {-theta * n.y(), theta * n.x()}; }

}  // namespace rotafem
