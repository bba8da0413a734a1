#include "rotafem/basis.hpp"

namespace rotafem {

LagrangeBasis::LagrangeBasis(int degree) : degree_(degree) {
  switch (degree) {
    case 0: nodes_ = {Vec2(1.0 / 3.0, 1.0 / 3.0)}; break;
    case 1: nodes_ = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)}; break;
    case 2:
      nodes_ = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1), Vec2(0.5, 0.5), Vec2(0, 0.5), Vec2(0.5, 0)};
      break;
    default: throw InvalidArgument("LagrangeBasis: degree must be 0, 1 or 2");
  }
}

void LagrangeBasis::values(const Vec2& xi, double* out) const {
  const double l1 = xi.x(), l2 = xi.y(), l0 = 1.0 - l1 - l2;
  switch (degree_) {
    case 0: out[0] = 1.0; break;
    case 1:
      out[0] = l0;
      out[1] = l1;
      out[2] = l2;
      break;
    case 2:
      out[0] = l0 * (2.0 * l0 - 1.0);
      out[1] = l1 * (2.0 * l1 - 1.0);
      out[2] = l2 * (2.0 * l2 - 1.0);
      out[3] = 4.0 * l1 * l2;
      out[4] = 4.0 * l2 * l0;
      out[5] = 4.0 * l0 * l1;
      break;
  }
}

void LagrangeBasis::gradients(const Vec2& xi, Vec2* out) const {
  const double l1 = xi.x(), l2 = xi.y(), l0 = 1.0 - l1 - l2;
  const Vec2 g0(-1, -1), g1(1, 0), g2(0, 1);
  switch (degree_) {
    case 0: out[0] = Vec2::Zero(); break;
    case 1:
      out[0] = g0;
      out[1] = g1;
      out[2] = g2;
      break;
    case 2:
      out[0] = (4.0 * l0 - 1.0) * g0;
      out[1] = (4.0 * l1 - 1.0) * g1;
      out[2] = (4.0 * l2 - 1.0) * g2;
      out[3] = 4.0 * (l1 * g2 + l2 * g1);
      out[4] = 4.0 * (l2 * g0 + l0 * g2);
      out[5] = 4.0 * (l0 * g1 + l1 * g0);
      break;
  }
}

void LagrangeBasis::hessians(const Vec2& /*xi*/, Mat2* out) const {
  const int n = size();
  for (int i = 0; i < n; ++i) out[i] = Mat2::Zero();
  if (degree_ < 2) return;
  const Vec2 g0(-1, -1), g1(1, 0), g2(0, 1);
  auto sym = [](const Vec2& a, const Vec2& b) -> Mat2 { return a * b.transpose() + b * a.transpose(); };
  out[0] = 4.0 * g0 * g0.transpose();
  out[1] = 4.0 * g1 * g1.transpose();
  out[2] = 4.0 * g2 * g2.transpose();
  out[3] = 4.0 * sym(g1, g2);
  out[4] = 4.0 * sym(g2, g0);
  out[5] = 4.0 * sym(g0, g1);
}

const LagrangeBasis& lagrange_basis(int degree) {
  static const LagrangeBasis b0(0), b1(1), b2(2);
  switch (degree) {
    case 0: return b0;
    case 1: return b1;
    case 2: return b2;
    default: throw InvalidArgument("lagrange_basis: degree must be 0, 1 or 2");
  }
}

BasisTable tabulate(int degree, const std::vector<Vec2>& points) {
  const LagrangeBasis& b = lagrange_basis(degree);
  BasisTable t;
  t.size = b.size();
  t.points = static_cast<int>(points.size());
  t.value.resize(t.points * t.size);
  t.grad.resize(t.points * t.size);
  t.hess.resize(t.points * t.size);
  for (int q = 0; q < t.points; ++q) {
    b.values(points[q], &t.value[q * t.size]);
    b.gradients(points[q], &t.grad[q * t.size]);
    b.hessians(points[q], &t.hess[q * t.size]);
  }
  return t;
}

AffineMap::AffineMap(const Vec2& a, const Vec2& b, const Vec2& c) : origin(a) {
  jacobian.col(0) = b - a;
  jacobian.col(1) = c - a;
  det = jacobian.determinant();
  inverse_transpose = jacobian.inverse().transpose();
}

}  // namespace rotafem
