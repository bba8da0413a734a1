#include "rotafem/quadrature.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <utility>

namespace rotafem {

namespace {

// Legendre polynomial P_n and its derivative at x.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  if (n == 0) return {1.0, 0.0};
  return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

}  // namespace

LineRule gauss_legendre(int n) {
  if (n < 1) throw InvalidArgument("gauss_legendre: need at least one point");
  LineRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(n, x).second;
    // Map [-1, 1] -> [0, 1].
    rule.points[n - 1 - i] = 0.5 * (x + 1.0);
    rule.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

namespace {

QuadratureRule centroid_rule() {
  QuadratureRule r;
  r.order = 1;
  r.points = {Vec2(1.0 / 3.0, 1.0 / 3.0)};
  r.weights = {0.5};
  return r;
}

QuadratureRule three_point_rule() {
  QuadratureRule r;
  r.order = 2;
  r.points = {Vec2(1.0 / 6.0, 1.0 / 6.0), Vec2(2.0 / 3.0, 1.0 / 6.0), Vec2(1.0 / 6.0, 2.0 / 3.0)};
  r.weights = {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
  return r;
}

// Radon's seven-point rule, exact to degree 5.
QuadratureRule seven_point_rule() {
  QuadratureRule r;
  r.order = 5;
  const double s15 = std::sqrt(15.0);
  const double a1 = (6.0 - s15) / 21.0, w1 = (155.0 - s15) / 2400.0;
  const double a2 = (6.0 + s15) / 21.0, w2 = (155.0 + s15) / 2400.0;
  r.points = {Vec2(1.0 / 3.0, 1.0 / 3.0),
              Vec2(a1, a1), Vec2(1.0 - 2.0 * a1, a1), Vec2(a1, 1.0 - 2.0 * a1),
              Vec2(a2, a2), Vec2(1.0 - 2.0 * a2, a2), Vec2(a2, 1.0 - 2.0 * a2)};
  r.weights = {9.0 / 80.0, w1, w1, w1, w2, w2, w2};
  return r;
}

// Duffy map x = s, y = t (1 - s) of a tensor Gauss rule; the Jacobian (1 - s)
// raises the degree in s by one.
QuadratureRule collapsed_rule(int order) {
  const int n = (order + 3) / 2;
  const LineRule g = gauss_legendre(n);
  QuadratureRule r;
  r.order = order;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double s = g.points[i], t = g.points[j];
      r.points.emplace_back(s, t * (1.0 - s));
      r.weights.push_back(g.weights[i] * g.weights[j] * (1.0 - s));
    }
  }
  return r;
}

constexpr int kMaxOrder = 12;

}  // namespace

const QuadratureRule& quadrature_rule(int order) {
  if (order < 1 || order > kMaxOrder)
    throw InvalidArgument("quadrature_rule: unsupported order " + std::to_string(order));
  static const std::array<QuadratureRule, kMaxOrder + 1> rules = [] {
    std::array<QuadratureRule, kMaxOrder + 1> out;
    out[1] = centroid_rule();
    out[2] = three_point_rule();
    for (int o = 3; o <= 5; ++o) {
      out[o] = seven_point_rule();
      out[o].order = o;
    }
    for (int o = 6; o <= kMaxOrder; ++o) out[o] = collapsed_rule(o);
    return out;
  }();
  return rules[order];
}

const LineRule& edge_rule(int order) {
  if (order < 1 || order > 2 * kMaxOrder)
    throw InvalidArgument("edge_rule: unsupported order " + std::to_string(order));
  static const std::array<LineRule, 2 * kMaxOrder + 1> rules = [] {
    std::array<LineRule, 2 * kMaxOrder + 1> out;
    for (int o = 1; o <= 2 * kMaxOrder; ++o) out[o] = gauss_legendre((o + 2) / 2);
    return out;
  }();
  return rules[order];
}

}  // namespace rotafem
