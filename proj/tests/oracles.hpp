#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include "rotafem/forms.hpp"
#include "rotafem/quadrature.hpp"
#include "rotafem/space.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <vector>

namespace rotafem::oracle {

// Dense oracle: every matrix entry is B(e_j, e_i) evaluated from the global
// discrete functions e_j through space::evaluate, with a finer rule.
struct Point {
  Vec2 u = Vec2::Zero();
  Mat2 gu = Mat2::Zero();
  double om = 0, pr = 0, pf = 0;
  Vec2 gpf = Vec2::Zero();
};

struct Names {
  const char *om, *pr, *pf;
};

inline Names names_for(const Discretization& d, const Mesh& m, int cell) {
  switch (d.kind) {
    case ProblemKind::Elasticity: return {"omega", "p", nullptr};
    case ProblemKind::Biot: return {"omega", "phi", "pf"};
    case ProblemKind::Interface:
      if (m.cell_subdomain[cell] == Subdomain::Poro) return {"omega_p", "phi_p", "pf_p"};
      return {"omega_e", "p_e", nullptr};
  }
  return {};
}

inline Eigen::VectorXd block(const Discretization& d, const Eigen::VectorXd& x, const char* name) {
  const FieldBlock& f = d.field(name);
  return x.segment(f.offset, f.space.dof_count());
}

inline Point eval_point(const Discretization& d, const Mesh& m, const Eigen::VectorXd& x, int cell, const Vec2& xi) {
  Point p;
  const Names nm = names_for(d, m, cell);
  const FieldBlock& u = d.field("u");
  const Eigen::VectorXd xu = block(d, x, "u");
  for (int c = 0; c < 2; ++c) {
    p.u[c] = evaluate(u.space, m, xu, cell, xi, c);
    p.gu.row(c) = evaluate_grad(u.space, m, xu, cell, xi, c).transpose();
  }
  p.om = evaluate(d.field(nm.om).space, m, block(d, x, nm.om), cell, xi);
  p.pr = evaluate(d.field(nm.pr).space, m, block(d, x, nm.pr), cell, xi);
  if (nm.pf) {
    p.pf = evaluate(d.field(nm.pf).space, m, block(d, x, nm.pf), cell, xi);
    p.gpf = evaluate_grad(d.field(nm.pf).space, m, block(d, x, nm.pf), cell, xi);
  }
  return p;
}

inline double curl(const Mat2& g) { return g(1, 0) - g(0, 1); }
inline double div(const Mat2& g) { return g.trace(); }

// B((u, omega, pr, pf), (v, theta, q, qf)) integrand.
inline double form(const Point& t, const Point& s, const Material& mat, const ProblemParams& P, bool poro) {
  const double smu = std::sqrt(mat.mu), inv = 1.0 / (2 * mat.mu + mat.lambda);
  double r = -smu * curl(s.gu) * t.om + t.pr * div(s.gu) + s.om * t.om - smu * s.om * curl(t.gu) +
             s.pr * div(t.gu) + inv * t.pr * s.pr;
  if (poro)
    r += -P.alpha * inv * t.pf * s.pr + P.alpha * inv * t.pr * s.pf -
         (P.c0 + P.alpha * P.alpha * inv) * t.pf * s.pf - P.kappa / P.xi * t.gpf.dot(s.gpf);
  return r;
}

inline Eigen::MatrixXd oracle_matrix(const Mesh& m, const Discretization& d, const ProblemParams& P) {
  const int n = d.num_dofs();
  const QuadratureRule& rule = quadrature_rule(10);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int c = 0; c < static_cast<int>(m.num_cells()); ++c) {
    const bool poro = names_for(d, m, c).pf != nullptr;
    const Material& mat = poro ? P.poro : P.elastic;
    const AffineMap map(m.vertex(c, 0), m.vertex(c, 1), m.vertex(c, 2));
    std::vector<std::vector<Point>> pts(n);
    std::vector<int> touching;
    for (int j = 0; j < n; ++j) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      e(j) = 1.0;
      bool nz = false;
      for (std::size_t q = 0; q < rule.size(); ++q) {
        pts[j].push_back(eval_point(d, m, e, c, rule.points[q]));
        const Point& p = pts[j].back();
        nz = nz || p.u.norm() + p.gu.norm() + std::abs(p.om) + std::abs(p.pr) + std::abs(p.pf) + p.gpf.norm() > 0;
      }
      if (nz) touching.push_back(j);
    }
    for (int i : touching)
      for (int j : touching)
        for (std::size_t q = 0; q < rule.size(); ++q)
          A(i, j) += rule.weights[q] * std::abs(map.det) * form(pts[j][q], pts[i][q], mat, P, poro);
  }
  if (!P.stabilization) return A;
  const LineRule& er = edge_rule(6);
  for (int e = 0; e < static_cast<int>(m.num_edges()); ++e) {
    if (m.edge_class[e] != EdgeClass::Interior) continue;
    const int c0 = m.edges[e].cells[0], c1 = m.edges[e].cells[1];
    const Vec2 a = m.vertices[m.edges[e].v[0]], b = m.vertices[m.edges[e].v[1]];
    const AffineMap m0(m.vertex(c0, 0), m.vertex(c0, 1), m.vertex(c0, 2));
    const AffineMap m1(m.vertex(c1, 0), m.vertex(c1, 1), m.vertex(c1, 2));
    const bool poro = names_for(d, m, c0).pf != nullptr;
    const double mu = poro ? P.poro.mu : P.elastic.mu;
    const FieldBlock& f = d.field(names_for(d, m, c0).pr);
    for (std::size_t q = 0; q < er.points.size(); ++q) {
      const Vec2 x = a + er.points[q] * (b - a);
      std::vector<double> jump(n, 0.0);
      for (int j = f.offset; j < f.offset + f.space.dof_count(); ++j) {
        Eigen::VectorXd e0 = Eigen::VectorXd::Zero(f.space.dof_count());
        e0(j - f.offset) = 1.0;
        jump[j] = evaluate(f.space, m, e0, c0, m0.to_reference(x)) - evaluate(f.space, m, e0, c1, m1.to_reference(x));
      }
      const double w = er.weights[q] * (b - a).norm() * (b - a).norm() / mu;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) += w * jump[i] * jump[j];
    }
  }
  return A;
}

// Smallest subset size whose sum reaches target, by enumerating all subsets.
inline int brute_force_min_size(const std::vector<double>& eta, double target) {
  const int n = static_cast<int>(eta.size());
  int best = n + 1;
  std::vector<double> sums(std::size_t{1} << n, 0.0);
  for (std::size_t mask = 1; mask < sums.size(); ++mask) {
    const int low = std::countr_zero(mask);
    sums[mask] = sums[mask & (mask - 1)] + eta[low];
    if (sums[mask] >= target) best = std::min(best, std::popcount(mask));
  }
  return target <= 0.0 ? 0 : best;
}

}  // namespace rotafem::oracle
