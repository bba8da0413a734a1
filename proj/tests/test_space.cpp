#include <doctest.h>

#include "rotafem/space.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace rotafem;

namespace {

double integrate(const QuadratureRule& r, const std::function<double(double, double)>& f) {
  double s = 0.0;
  for (std::size_t q = 0; q < r.size(); ++q) s += r.weights[q] * f(r.points[q].x(), r.points[q].y());
  return s;
}

// Exact integral of x^a y^b over the reference triangle: a! b! / (a+b+2)!.
double monomial_integral(int a, int b) {
  return std::tgamma(a + 1.0) * std::tgamma(b + 1.0) / std::tgamma(a + b + 3.0);
}

}  // namespace

TEST_CASE("quadrature exactness") {
  for (int order = 1; order <= 12; ++order) {
    const QuadratureRule& r = quadrature_rule(order);
    double wsum = 0.0;
    for (double w : r.weights) wsum += w;
    CHECK(wsum == doctest::Approx(0.5).epsilon(1e-14));
    for (int a = 0; a <= order; ++a)
      for (int b = 0; a + b <= order; ++b) {
        const double got = integrate(r, [&](double x, double y) { return std::pow(x, a) * std::pow(y, b); });
        CHECK(got == doctest::Approx(monomial_integral(a, b)).epsilon(1e-13));
      }
  }
  CHECK(integrate(quadrature_rule(1), [](double x, double) { return x; }) == doctest::Approx(1.0 / 6.0));
  CHECK(integrate(quadrature_rule(2), [](double x, double) { return x * x; }) == doctest::Approx(1.0 / 12.0));
  CHECK_THROWS_AS(quadrature_rule(0), InvalidArgument);
  CHECK_THROWS_AS(quadrature_rule(13), InvalidArgument);
}

TEST_CASE("order 8 rule on sin(pi x) sin(pi y) over the unit square") {
  const Mesh m = build_unit_square(1);
  const QuadratureRule& r = quadrature_rule(8);
  double s = 0.0;
  for (int c = 0; c < 2; ++c) {
    const AffineMap map(m.vertex(c, 0), m.vertex(c, 1), m.vertex(c, 2));
    for (std::size_t q = 0; q < r.size(); ++q) {
      const Vec2 x = map.to_physical(r.points[q]);
      s += r.weights[q] * std::abs(map.det) * std::sin(std::numbers::pi * x.x()) * std::sin(std::numbers::pi * x.y());
    }
  }
  CHECK(std::abs(s - 4.0 / (std::numbers::pi * std::numbers::pi)) < 1e-8);
}

TEST_CASE("edge rules integrate polynomials") {
  for (int order = 1; order <= 12; ++order) {
    const LineRule& r = edge_rule(order);
    double s = 0.0;
    for (std::size_t q = 0; q < r.points.size(); ++q) s += r.weights[q] * std::pow(r.points[q], order);
    CHECK(s == doctest::Approx(1.0 / (order + 1.0)).epsilon(1e-13));
  }
}

TEST_CASE("dof counts from the tables") {
  const Mesh m = build_unit_square(4);
  const Space v1 = build_space(m, Family::Continuous, 1, ValueShape::Vector);
  const Space w0 = build_space(m, Family::Discontinuous, 0, ValueShape::Scalar);
  CHECK(v1.dof_count() + 2 * w0.dof_count() == 114);
  const Space v2 = build_space(m, Family::Continuous, 2, ValueShape::Vector);
  const Space w1 = build_space(m, Family::Discontinuous, 1, ValueShape::Scalar);
  CHECK(v2.dof_count() == 162);
  CHECK(v2.dof_count() + 2 * w1.dof_count() == 354);
  const Space q1 = build_space(m, Family::Continuous, 1, ValueShape::Scalar);
  CHECK(q1.dof_count() == 25);
  CHECK(114 + q1.dof_count() == 139);

  // Closed forms.
  const Space q2 = build_space(m, Family::Continuous, 2, ValueShape::Scalar);
  CHECK(q2.dof_count() == static_cast<int>(m.num_vertices() + m.num_edges()));
  for (int k = 0; k <= 2; ++k)
    CHECK(build_space(m, Family::Discontinuous, k, ValueShape::Scalar).dof_count() ==
          static_cast<int>(m.num_cells()) * (k + 1) * (k + 2) / 2);
  CHECK_THROWS_AS(build_space(m, Family::Continuous, 0, ValueShape::Scalar), InvalidArgument);
}

TEST_CASE("restricted spaces") {
  const Mesh m = build_unit_square(4, Partition::HorizontalMidline);
  const Space qp = build_space(m, Family::Continuous, 1, ValueShape::Scalar, Subdomain::Poro);
  CHECK(qp.dof_count() == 15);  // 5 x 3 vertices on y <= 1/2
  const Space we = build_space(m, Family::Discontinuous, 0, ValueShape::Scalar, Subdomain::Elastic);
  CHECK(we.dof_count() == 16);
  for (std::size_t c = 0; c < m.num_cells(); ++c)
    CHECK(qp.active(static_cast<int>(c)) == (m.cell_subdomain[c] == Subdomain::Poro));
  // Every referenced index is distinct and in range.
  std::vector<int> seen(qp.dof_count(), 0);
  for (int n : qp.cell_nodes)
    if (n >= 0) seen[n] = 1;
  for (int s : seen) CHECK(s == 1);
}

TEST_CASE("basis: Kronecker property, partition of unity") {
  for (int k = 1; k <= 2; ++k) {
    const LagrangeBasis& b = lagrange_basis(k);
    for (int i = 0; i < b.size(); ++i) {
      double v[6];
      b.values(b.nodes()[i], v);
      for (int j = 0; j < b.size(); ++j) CHECK(v[j] == doctest::Approx(i == j ? 1.0 : 0.0));
    }
  }
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    double x = u(rng), y = u(rng);
    if (x + y > 1.0) {
      x = 1.0 - x;
      y = 1.0 - y;
    }
    for (int k = 0; k <= 2; ++k) {
      const LagrangeBasis& b = lagrange_basis(k);
      double v[6];
      b.values(Vec2(x, y), v);
      double s = 0.0;
      for (int j = 0; j < b.size(); ++j) s += v[j];
      CHECK(std::abs(s - 1.0) < 1e-14);
    }
  }
}

TEST_CASE("basis gradients and Hessians against finite differences") {
  const double h = 1e-6;
  const Vec2 p(0.23, 0.41);
  for (int k = 1; k <= 2; ++k) {
    const LagrangeBasis& b = lagrange_basis(k);
    Vec2 g[6];
    Mat2 H[6];
    b.gradients(p, g);
    b.hessians(p, H);
    double vpx[6], vmx[6], vpy[6], vmy[6];
    b.values(p + Vec2(h, 0), vpx);
    b.values(p - Vec2(h, 0), vmx);
    b.values(p + Vec2(0, h), vpy);
    b.values(p - Vec2(0, h), vmy);
    for (int i = 0; i < b.size(); ++i) {
      CHECK(g[i].x() == doctest::Approx((vpx[i] - vmx[i]) / (2 * h)).epsilon(1e-8));
      CHECK(g[i].y() == doctest::Approx((vpy[i] - vmy[i]) / (2 * h)).epsilon(1e-8));
    }
    Vec2 gp[6], gm[6];
    b.gradients(p + Vec2(h, 0), gp);
    b.gradients(p - Vec2(h, 0), gm);
    for (int i = 0; i < b.size(); ++i) {
      CHECK(H[i](0, 0) == doctest::Approx((gp[i].x() - gm[i].x()) / (2 * h)).epsilon(1e-6));
      CHECK(H[i](1, 0) == doctest::Approx((gp[i].y() - gm[i].y()) / (2 * h)).epsilon(1e-6));
    }
  }
}

TEST_CASE("curl of interpolated rotation field") {
  const Mesh m = build_unit_square(3);
  const Space v = build_space(m, Family::Continuous, 1, ValueShape::Vector);
  const Eigen::VectorXd c = interpolate(v, m, VectorFunction([](const Vec2& x) { return Vec2(-x.y(), x.x()); }));
  for (std::size_t cell = 0; cell < m.num_cells(); ++cell) {
    const Vec2 xi(0.2, 0.3);
    const Vec2 g0 = evaluate_grad(v, m, c, static_cast<int>(cell), xi, 0);
    const Vec2 g1 = evaluate_grad(v, m, c, static_cast<int>(cell), xi, 1);
    Mat2 G;
    G.row(0) = g0.transpose();
    G.row(1) = g1.transpose();
    CHECK(curl_of_vector(G) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(div_of_vector(G) == doctest::Approx(0.0));
  }
}

TEST_CASE("interpolation reproduces polynomials") {
  const Mesh m = bisect(build_unit_square(3), {2, 7});
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 1; k <= 2; ++k) {
    const Space s = build_space(m, Family::Continuous, k, ValueShape::Scalar);
    const ScalarFunction f = [k](const Vec2& x) {
      return k == 1 ? 1.0 + 2.0 * x.x() - 3.0 * x.y() : 1.0 + x.x() * x.y() - x.y() * x.y() + 0.5 * x.x();
    };
    const Eigen::VectorXd c = interpolate(s, m, f);
    for (int t = 0; t < 20; ++t) {
      const int cell = static_cast<int>(rng() % m.num_cells());
      double a = u(rng), b = u(rng);
      if (a + b > 1) {
        a = 1 - a;
        b = 1 - b;
      }
      const AffineMap map(m.vertex(cell, 0), m.vertex(cell, 1), m.vertex(cell, 2));
      CHECK(evaluate(s, m, c, cell, Vec2(a, b)) == doctest::Approx(f(map.to_physical(Vec2(a, b)))).epsilon(1e-12));
    }
  }
  for (int k = 0; k <= 2; ++k) {
    const Space s = build_space(m, Family::Discontinuous, k, ValueShape::Scalar);
    const ScalarFunction f = [k](const Vec2& x) { return k == 0 ? 3.0 : k == 1 ? x.x() - x.y() : x.x() * x.x() + x.y(); };
    const Eigen::VectorXd c = interpolate(s, m, f);
    CHECK(l2_distance(s, m, c, f) < 1e-12);
  }
}

TEST_CASE("projection: constants, means and optimality") {
  const Mesh m = build_unit_square(2);
  const Space s0 = build_space(m, Family::Discontinuous, 0, ValueShape::Scalar);
  const Eigen::VectorXd one = project_onto(s0, m, ScalarFunction([](const Vec2&) { return 1.0; }));
  for (int i = 0; i < one.size(); ++i) CHECK(one(i) == doctest::Approx(1.0).epsilon(1e-14));
  const Eigen::VectorXd px = project_onto(s0, m, ScalarFunction([](const Vec2& x) { return x.x(); }));
  for (std::size_t c = 0; c < m.num_cells(); ++c)
    CHECK(px(s0.dof(static_cast<int>(c), 0, 0)) == doctest::Approx(m.centroid(static_cast<int>(c)).x()).epsilon(1e-14));

  const ScalarFunction f = [](const Vec2& x) { return std::exp(x.x()) * std::sin(3 * x.y()); };
  const Space s1 = build_space(m, Family::Discontinuous, 1, ValueShape::Scalar);
  const Eigen::VectorXd c = project_onto(s1, m, f);
  const double best = l2_distance(s1, m, c, f);
  std::mt19937 rng(11);
  std::normal_distribution<double> nd(0.0, 1e-3);
  for (int t = 0; t < 25; ++t) {
    Eigen::VectorXd d = c;
    for (int i = 0; i < d.size(); ++i) d(i) += nd(rng);
    CHECK(l2_distance(s1, m, d, f) >= best);
  }
  CHECK_THROWS_AS(project_onto(build_space(m, Family::Continuous, 1, ValueShape::Scalar), m, f), InvalidArgument);
}

TEST_CASE("projection error of sin(pi x) decays at rate 2 for degree 1") {
  const ScalarFunction f = [](const Vec2& x) { return std::sin(std::numbers::pi * x.x()); };
  double prev = 0.0;
  for (int n : {8, 16}) {
    const Mesh m = build_unit_square(n);
    const Space s = build_space(m, Family::Discontinuous, 1, ValueShape::Scalar);
    const double e = l2_distance(s, m, project_onto(s, m, f), f);
    if (prev > 0.0) CHECK(std::log(prev / e) / std::log(2.0) == doctest::Approx(2.0).epsilon(0.03));
    prev = e;
  }
}
