#include "rotafem/estimate.hpp"

#include "rotafem/quadrature.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>

namespace rotafem {

std::vector<double> EstimatorReport::marking_indicators(const Mesh& mesh) const {
  std::vector<double> out = cell;
  for (std::size_t e = 0; e < interface_edge.size(); ++e) {
    if (interface_edge[e] == 0.0) continue;
    for (int c : mesh.edges[e].cells)
      if (c >= 0) out[c] += 0.5 * interface_edge[e];
  }
  return out;
}

namespace {

struct Side {
  bool poro = false;
  const Material* mat = nullptr;
  const Space* om_s = nullptr;
  const Eigen::VectorXd* om = nullptr;
  const Space* pr_s = nullptr;
  const Eigen::VectorXd* pr = nullptr;
  const Space* pf_s = nullptr;
  const Eigen::VectorXd* pf = nullptr;
};

struct Context {
  const Mesh& mesh;
  const ProblemParams& P;
  ProblemKind kind;
  int k;
  const Space* u_s;
  const Eigen::VectorXd* u;
  Side elastic, poro;

  Context(const Mesh& m, const FieldSolution& sol, const ProblemParams& p)
      : mesh(m), P(p), kind(sol.kind), k(sol.k), u_s(&sol.space("u")), u(&sol["u"]) {
    auto bind = [&](Side& s, bool is_poro, const Material& mat, const char* om, const char* pr, const char* pf) {
      s.poro = is_poro;
      s.mat = &mat;
      s.om_s = &sol.space(om);
      s.om = &sol[om];
      s.pr_s = &sol.space(pr);
      s.pr = &sol[pr];
      if (pf) {
        s.pf_s = &sol.space(pf);
        s.pf = &sol[pf];
      }
    };
    switch (kind) {
      case ProblemKind::Elasticity: bind(elastic, false, p.elastic, "omega", "p", nullptr); break;
      case ProblemKind::Biot: bind(poro, true, p.poro, "omega", "phi", "pf"); break;
      case ProblemKind::Interface:
        bind(elastic, false, p.elastic, "omega_e", "p_e", nullptr);
        bind(poro, true, p.poro, "omega_p", "phi_p", "pf_p");
        break;
    }
    if (u_s->cell_nodes.size() != m.num_cells() * static_cast<std::size_t>(u_s->nodes_per_cell))
      throw InvalidArgument("estimator: solution does not belong to this mesh");
  }

  const Side& side(int cell) const {
    switch (kind) {
      case ProblemKind::Elasticity: return elastic;
      case ProblemKind::Biot: return poro;
      case ProblemKind::Interface: return mesh.cell_subdomain[cell] == Subdomain::Poro ? poro : elastic;
    }
    return elastic;
  }
};

// Discrete fields of one cell evaluated at physical points.
struct Local {
  AffineMap map;
  int ku = 2, kw = 1;
  double u[2][6] = {}, om[6] = {}, pr[6] = {}, pf[6] = {};
  bool poro = false;
};

struct Values {
  Mat2 gu = Mat2::Zero();  // gu(i, j) = d u_i / d x_j
  double om = 0, pr = 0, pf = 0, lap_pf = 0;
  Vec2 gom = Vec2::Zero(), gpr = Vec2::Zero(), gpf = Vec2::Zero();
};

Local gather(const Context& ctx, int cell) {
  Local L;
  const Mesh& m = ctx.mesh;
  L.map = AffineMap(m.vertex(cell, 0), m.vertex(cell, 1), m.vertex(cell, 2));
  L.ku = ctx.k + 1;
  L.kw = ctx.k;
  const Side& s = ctx.side(cell);
  L.poro = s.poro;
  const int nu = lagrange_dim(L.ku), nw = lagrange_dim(L.kw);
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < nu; ++i) L.u[c][i] = (*ctx.u)(ctx.u_s->dof(cell, c, i));
  for (int i = 0; i < nw; ++i) {
    L.om[i] = (*s.om)(s.om_s->dof(cell, 0, i));
    L.pr[i] = (*s.pr)(s.pr_s->dof(cell, 0, i));
  }
  if (s.poro)
    for (int i = 0; i < nu; ++i) L.pf[i] = (*s.pf)(s.pf_s->dof(cell, 0, i));
  return L;
}

Values eval(const Local& L, const Vec2& xi, bool hessian) {
  Values v;
  const LagrangeBasis& bu = lagrange_basis(L.ku);
  const LagrangeBasis& bw = lagrange_basis(L.kw);
  double phi[6];
  Vec2 g[6];
  bu.gradients(xi, g);
  for (int i = 0; i < bu.size(); ++i) {
    const Vec2 gp = L.map.grad(g[i]);
    v.gu.row(0) += L.u[0][i] * gp.transpose();
    v.gu.row(1) += L.u[1][i] * gp.transpose();
    if (L.poro) v.gpf += L.pf[i] * gp;
  }
  if (L.poro) {
    bu.values(xi, phi);
    for (int i = 0; i < bu.size(); ++i) v.pf += L.pf[i] * phi[i];
    if (hessian && L.ku > 1) {
      Mat2 h[6];
      bu.hessians(xi, h);
      for (int i = 0; i < bu.size(); ++i) v.lap_pf += L.pf[i] * L.map.hessian(h[i]).trace();
    }
  }
  bw.values(xi, phi);
  bw.gradients(xi, g);
  for (int i = 0; i < bw.size(); ++i) {
    const Vec2 gp = L.map.grad(g[i]);
    v.om += L.om[i] * phi[i];
    v.pr += L.pr[i] * phi[i];
    v.gom += L.om[i] * gp;
    v.gpr += L.pr[i] * gp;
  }
  return v;
}

inline Vec2 curl_scalar(const Vec2& g) { return {g.y(), -g.x()}; }
inline Vec2 cross(double w, const Vec2& n) { return {-w * n.y(), w * n.x()}; }

double rho_d(const Material& m) { return 1.0 / (1.0 / m.mu + 1.0 / m.stiffness()); }
double storage(const ProblemParams& P) { return P.c0 + P.alpha * P.alpha / P.poro.stiffness(); }
double rho_1(const ProblemParams& P, double h) {
  const double cc = storage(P);
  const double a = cc > 0.0 ? 1.0 / cc : INFINITY;
  return std::min(a, h * h * P.xi / P.kappa);
}

// Cell-wise L2 projections of the data onto degree k + 1.
struct ProjectedData {
  Space vec_space, scalar_space;
  Eigen::VectorXd f_elastic, f_poro, source;
  bool has_fe = false, has_fp = false, has_s = false;
};

ProjectedData project_data(const Mesh& mesh, int k, const ProblemData& data, int order) {
  ProjectedData d;
  d.vec_space = build_space(mesh, Family::Discontinuous, k + 1, ValueShape::Vector);
  d.scalar_space = build_space(mesh, Family::Discontinuous, k + 1, ValueShape::Scalar);
  if (data.f_elastic) {
    d.f_elastic = project_onto(d.vec_space, mesh, data.f_elastic, order);
    d.has_fe = true;
  }
  if (data.f_poro) {
    d.f_poro = project_onto(d.vec_space, mesh, data.f_poro, order);
    d.has_fp = true;
  }
  if (data.source) {
    d.source = project_onto(d.scalar_space, mesh, data.source, order);
    d.has_s = true;
  }
  return d;
}

double dg_value(const Space& s, const Eigen::VectorXd& v, int cell, int comp, const double* phi) {
  double r = 0.0;
  for (int i = 0; i < s.nodes_per_cell; ++i) r += v(s.dof(cell, comp, i)) * phi[i];
  return r;
}

struct CellOut {
  double momentum = 0, rotation = 0, divergence = 0, mass = 0, osc = 0;
};

CellOut cell_volume_terms(const Context& ctx, const ProjectedData& pd, const ProblemData& data, int cell,
                          int data_order) {
  CellOut out;
  const Local L = gather(ctx, cell);
  const Side& s = ctx.side(cell);
  const Material& m = *s.mat;
  const ProblemParams& P = ctx.P;
  const double smu = std::sqrt(m.mu), inv = 1.0 / m.stiffness();
  const double h = cell_diameter(ctx.mesh, cell);
  const double det = std::abs(L.map.det);
  const LagrangeBasis& bf = lagrange_basis(ctx.k + 1);
  const Eigen::VectorXd* fh = s.poro ? (pd.has_fp ? &pd.f_poro : nullptr) : (pd.has_fe ? &pd.f_elastic : nullptr);
  const bool has_sh = s.poro && pd.has_s;
  const double cc = storage(P);

  const QuadratureRule& rule = quadrature_rule(2 * ctx.k + 4);
  double r1 = 0, r2 = 0, r3 = 0, r4 = 0;
  double phi[6];
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const double w = rule.weights[q] * det;
    const Vec2& xi = rule.points[q];
    const Values v = eval(L, xi, s.poro);
    bf.values(xi, phi);
    Vec2 f = Vec2::Zero();
    if (fh) f = {dg_value(pd.vec_space, *fh, cell, 0, phi), dg_value(pd.vec_space, *fh, cell, 1, phi)};
    const Vec2 R1 = f - smu * curl_scalar(v.gom) - v.gpr;
    const double R2 = v.om - smu * curl_of_vector(v.gu);
    double R3 = div_of_vector(v.gu) + inv * v.pr;
    if (s.poro) {
      R3 -= P.alpha * inv * v.pf;
      const double sh = has_sh ? dg_value(pd.scalar_space, pd.source, cell, 0, phi) : 0.0;
      const double R4 = sh - cc * v.pf + P.alpha * inv * v.pr + P.kappa / P.xi * v.lap_pf;
      r4 += w * R4 * R4;
    }
    r1 += w * R1.squaredNorm();
    r2 += w * R2 * R2;
    r3 += w * R3 * R3;
  }
  out.momentum = h * h / m.mu * r1;
  out.rotation = r2;
  out.divergence = rho_d(m) * r3;
  if (s.poro) out.mass = rho_1(P, h) * r4;

  // Oscillation of the data.
  const VectorFunction& fx = s.poro ? data.f_poro : data.f_elastic;
  const bool osc_s = s.poro && data.source;
  if (fx || osc_s) {
    const QuadratureRule& dr = quadrature_rule(data_order);
    double of = 0, os = 0;
    for (std::size_t q = 0; q < dr.size(); ++q) {
      const double w = dr.weights[q] * det;
      const Vec2 x = L.map.to_physical(dr.points[q]);
      bf.values(dr.points[q], phi);
      if (fx) {
        const Vec2 fh_x = fh ? Vec2(dg_value(pd.vec_space, *fh, cell, 0, phi), dg_value(pd.vec_space, *fh, cell, 1, phi))
                             : Vec2::Zero();
        of += w * (fx(x) - fh_x).squaredNorm();
      }
      if (osc_s) {
        const double d = data.source(x) - dg_value(pd.scalar_space, pd.source, cell, 0, phi);
        os += w * d * d;
      }
    }
    out.osc = h * h / m.mu * of + (s.poro ? rho_1(P, h) * os : 0.0);
  }
  return out;
}

int local_edge(const Mesh& mesh, int cell, int edge) {
  for (int i = 0; i < 3; ++i)
    if (mesh.cell_edges[cell][i] == edge) return i;
  throw InvalidArgument("edge is not an edge of the given cell");
}

struct EdgeGeometry {
  Vec2 a, b, n;
  double len;
};

EdgeGeometry edge_geometry(const Mesh& mesh, int cell, int edge) {
  const int i = local_edge(mesh, cell, edge);
  EdgeGeometry g;
  g.a = mesh.vertex(cell, (i + 1) % 3);
  g.b = mesh.vertex(cell, (i + 2) % 3);
  const Vec2 t = g.b - g.a;
  g.len = t.norm();
  g.n = Vec2(t.y(), -t.x()) / g.len;
  return g;
}

EdgeTerms interior_terms(const Context& ctx, int edge, int from) {
  const Edge& ed = ctx.mesh.edges[edge];
  const int other = ed.cells[0] == from ? ed.cells[1] : ed.cells[0];
  if (other < 0 || edge_class_for(ctx.mesh, ctx.kind, edge) != EdgeClass::Interior)
    throw InvalidArgument("interior_edge_terms: not an interior edge");
  const EdgeGeometry g = edge_geometry(ctx.mesh, from, edge);
  const Local L0 = gather(ctx, from), L1 = gather(ctx, other);
  const Side& s = ctx.side(from);
  const double smu = std::sqrt(s.mat->mu);
  const LineRule& er = edge_rule(2 * ctx.k + 3);
  double jt = 0.0, jf = 0.0;
  for (std::size_t q = 0; q < er.points.size(); ++q) {
    const Vec2 x = g.a + er.points[q] * (g.b - g.a);
    const Values v0 = eval(L0, L0.map.to_reference(x), false);
    const Values v1 = eval(L1, L1.map.to_reference(x), false);
    const double w = er.weights[q] * g.len;
    const Vec2 J = (v0.pr - v1.pr) * g.n - smu * cross(v0.om - v1.om, g.n);
    jt += w * J.squaredNorm();
    if (s.poro) {
      const double F = ctx.P.kappa / ctx.P.xi * (v0.gpf - v1.gpf).dot(g.n);
      jf += w * F * F;
    }
  }
  EdgeTerms t;
  // Each incident cell carries half of the edge term.
  t.traction = 0.5 * g.len / s.mat->mu * jt;
  if (s.poro) t.flux = 0.5 * ctx.P.xi * g.len / ctx.P.kappa * jf;
  return t;
}

double boundary_flux_term(const Context& ctx, const ProblemData& data, int edge, int order) {
  const int c = ctx.mesh.edges[edge].cells[0];
  const Side& s = ctx.side(c);
  if (!s.poro) return 0.0;
  const EdgeGeometry g = edge_geometry(ctx.mesh, c, edge);
  const Local L = gather(ctx, c);
  const ProblemParams& P = ctx.P;
  const LineRule& er = edge_rule(data.boundary_flux ? std::max(order, 2 * ctx.k + 3) : 2 * ctx.k + 3);
  double r = 0.0;
  for (std::size_t q = 0; q < er.points.size(); ++q) {
    const Vec2 x = g.a + er.points[q] * (g.b - g.a);
    const Values v = eval(L, L.map.to_reference(x), false);
    double F = P.kappa / P.xi * (v.gpf - P.rho * P.gravity).dot(g.n);
    if (data.boundary_flux) F -= data.boundary_flux(x, g.n);
    r += er.weights[q] * g.len * F * F;
  }
  return P.xi * g.len / P.kappa * r;
}

double interface_term(const Context& ctx, const ProblemData& data, int edge, int order) {
  const Edge& ed = ctx.mesh.edges[edge];
  const int cp = ctx.mesh.cell_subdomain[ed.cells[0]] == Subdomain::Poro ? ed.cells[0] : ed.cells[1];
  const int ce = cp == ed.cells[0] ? ed.cells[1] : ed.cells[0];
  const EdgeGeometry g = edge_geometry(ctx.mesh, cp, edge);
  const Local Lp = gather(ctx, cp), Le = gather(ctx, ce);
  const ProblemParams& P = ctx.P;
  const double sp = std::sqrt(P.poro.mu), se = std::sqrt(P.elastic.mu);
  const bool with_data = data.interface_flux || data.interface_traction;
  const LineRule& er = edge_rule(with_data ? std::max(order, 2 * ctx.k + 3) : 2 * ctx.k + 3);
  double rs = 0.0, rf = 0.0;
  for (std::size_t q = 0; q < er.points.size(); ++q) {
    const Vec2 x = g.a + er.points[q] * (g.b - g.a);
    const Values vp = eval(Lp, Lp.map.to_reference(x), false);
    const Values ve = eval(Le, Le.map.to_reference(x), false);
    Vec2 R = vp.pr * g.n - sp * cross(vp.om, g.n) - ve.pr * g.n + se * cross(ve.om, g.n);
    if (data.interface_traction) R -= data.interface_traction(x, g.n);
    double F = P.kappa / P.xi * (vp.gpf - P.rho * P.gravity).dot(g.n);
    if (data.interface_flux) F -= data.interface_flux(x, g.n);
    const double w = er.weights[q] * g.len;
    rs += w * R.squaredNorm();
    rf += w * F * F;
  }
  return g.len / (P.elastic.mu + P.poro.mu) * rs + g.len * P.xi / P.kappa * rf;
}

EstimatorReport run_estimator(const Mesh& mesh, const FieldSolution& sol, const ProblemParams& params,
                              const ProblemData& data, const EstimatorOptions& opts) {
  params.validate();
  const Context ctx(mesh, sol, params);
  const ProjectedData pd = project_data(mesh, sol.k, data, opts.data_order);
  const int nc = static_cast<int>(mesh.num_cells());
  const int ne = static_cast<int>(mesh.num_edges());

  EstimatorReport r;
  r.kind = sol.kind;
  EstimatorTerms& t = r.terms;
  for (auto* v : {&t.momentum, &t.rotation, &t.divergence, &t.mass, &t.traction, &t.flux}) v->assign(nc, 0.0);
  r.oscillation.assign(nc, 0.0);
  r.interface_edge.assign(ne, 0.0);
  const bool par = opts.policy == ExecPolicy::Parallel;

#pragma omp parallel for schedule(static) if (par)
  for (int c = 0; c < nc; ++c) {
    const CellOut o = cell_volume_terms(ctx, pd, data, c, opts.data_order);
    t.momentum[c] = o.momentum;
    t.rotation[c] = o.rotation;
    t.divergence[c] = o.divergence;
    t.mass[c] = o.mass;
    r.oscillation[c] = o.osc;
  }

  std::vector<EdgeTerms> edge_terms(ne);
#pragma omp parallel for schedule(static) if (par)
  for (int e = 0; e < ne; ++e) {
    switch (edge_class_for(mesh, sol.kind, e)) {
      case EdgeClass::Interior: edge_terms[e] = interior_terms(ctx, e, mesh.edges[e].cells[0]); break;
      case EdgeClass::Boundary: edge_terms[e].flux = boundary_flux_term(ctx, data, e, opts.data_order); break;
      case EdgeClass::Interface: r.interface_edge[e] = interface_term(ctx, data, e, opts.data_order); break;
    }
  }
  for (int e = 0; e < ne; ++e) {
    if (edge_class_for(mesh, sol.kind, e) == EdgeClass::Interface) continue;
    for (int c : mesh.edges[e].cells) {
      if (c < 0) continue;
      t.traction[c] += edge_terms[e].traction;
      t.flux[c] += edge_terms[e].flux;
    }
  }

  r.cell.resize(nc);
  double total = 0.0, osc = 0.0;
  for (int c = 0; c < nc; ++c) {
    r.cell[c] = t.momentum[c] + t.rotation[c] + t.divergence[c] + t.mass[c] + t.traction[c] + t.flux[c];
    total += r.cell[c];
    osc += r.oscillation[c];
  }
  for (double l : r.interface_edge) total += l;
  r.estimator = std::sqrt(total);
  r.global_oscillation = std::sqrt(osc);
  return r;
}

}  // namespace

EstimatorReport elasticity_estimator(const Mesh& mesh, const FieldSolution& sol, const ProblemParams& params,
                                     const ProblemData& data, const EstimatorOptions& opts) {
  if (sol.kind != ProblemKind::Elasticity) throw InvalidArgument("elasticity_estimator: wrong solution kind");
  return run_estimator(mesh, sol, params, data, opts);
}

EstimatorReport biot_estimator(const Mesh& mesh, const FieldSolution& sol, const ProblemParams& params,
                               const ProblemData& data, const EstimatorOptions& opts) {
  if (sol.kind != ProblemKind::Biot) throw InvalidArgument("biot_estimator: wrong solution kind");
  return run_estimator(mesh, sol, params, data, opts);
}

EstimatorReport interface_estimator(const Mesh& mesh, const FieldSolution& sol, const ProblemParams& params,
                                    const ProblemData& data, const EstimatorOptions& opts) {
  if (sol.kind != ProblemKind::Interface) throw InvalidArgument("interface_estimator: wrong solution kind");
  if (!mesh.has_interface()) throw InvalidArgument("interface_estimator: mesh has no interface edges");
  return run_estimator(mesh, sol, params, data, opts);
}

EstimatorReport estimate(const Mesh& mesh, const FieldSolution& sol, const ProblemParams& params,
                         const ProblemData& data, const EstimatorOptions& opts) {
  switch (sol.kind) {
    case ProblemKind::Elasticity: return elasticity_estimator(mesh, sol, params, data, opts);
    case ProblemKind::Biot: return biot_estimator(mesh, sol, params, data, opts);
    case ProblemKind::Interface: return interface_estimator(mesh, sol, params, data, opts);
  }
  throw InvalidArgument("estimate: unknown problem kind");
}

EdgeTerms interior_edge_terms(const Mesh& mesh, const FieldSolution& sol, const ProblemParams& params, int edge,
                              int from_cell) {
  const Context ctx(mesh, sol, params);
  return interior_terms(ctx, edge, from_cell);
}

// ---------------------------------------------------------------------------

double ErrorReport::e_u() const { return std::sqrt(u2); }
double ErrorReport::e_omega() const { return std::sqrt(omega2); }
double ErrorReport::e_pressure(bool mean_term) const {
  return std::sqrt(pressure2 + (mean_term ? pressure_mean2 : 0.0));
}
double ErrorReport::e_total_pressure(bool mean_term) const {
  return std::sqrt(total_pressure2 + (mean_term ? total_pressure_mean2 : 0.0));
}
double ErrorReport::e_fluid() const { return std::sqrt(fluid2); }
double ErrorReport::total(bool mean_term) const {
  double s = u2 + omega2 + pressure2 + total_pressure2 + fluid2;
  if (mean_term) s += pressure_mean2 + total_pressure_mean2;
  return std::sqrt(s);
}

namespace {

struct Accum {
  double integral = 0.0, area = 0.0, sq = 0.0;
};

}  // namespace

ErrorReport triple_norm_error(const Mesh& mesh, const FieldSolution& sol, const ExactSolution& exact,
                              const ProblemParams& params, int quad_order) {
  const Context ctx(mesh, sol, params);
  const QuadratureRule& rule = quadrature_rule(std::max(8, quad_order));
  const int nc = static_cast<int>(mesh.num_cells());
  if (!exact.grad_u) throw InvalidArgument("triple_norm_error: exact displacement gradient missing");
  ErrorReport r;
  // Pressure errors need subdomain means, so a first pass gathers them.
  Accum pe, pp;
  for (int pass = 0; pass < 2; ++pass) {
    const double me = pe.area > 0 ? pe.integral / pe.area : 0.0;
    const double mp = pp.area > 0 ? pp.integral / pp.area : 0.0;
    for (int c = 0; c < nc; ++c) {
      const Local L = gather(ctx, c);
      const Side& s = ctx.side(c);
      const double det = std::abs(L.map.det);
      const ScalarFunction& om = s.poro ? exact.omega_poro : exact.omega_elastic;
      const ScalarFunction& pr = s.poro ? exact.total_pressure : exact.pressure_elastic;
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const double w = rule.weights[q] * det;
        const Vec2 x = L.map.to_physical(rule.points[q]);
        const Values v = eval(L, rule.points[q], false);
        const double eq = (pr ? pr(x) : 0.0) - v.pr;
        Accum& acc = s.poro ? pp : pe;
        if (pass == 0) {
          acc.integral += w * eq;
          acc.area += w;
          continue;
        }
        const double m = s.poro ? mp : me;
        acc.sq += w * (eq - m) * (eq - m);
        const Mat2 eg = exact.grad_u(x) - v.gu;
        r.u2 += w * s.mat->mu * (std::pow(curl_of_vector(eg), 2) + std::pow(div_of_vector(eg), 2));
        const double eo = (om ? om(x) : 0.0) - v.om;
        r.omega2 += w * eo * eo;
        (s.poro ? r.omega_poro2 : r.omega_elastic2) += w * eo * eo;
        const double wp = w * eq * eq / s.mat->stiffness();
        (s.poro ? r.total_pressure2 : r.pressure2) += wp;
        if (s.poro) {
          const double ef = (exact.fluid_pressure ? exact.fluid_pressure(x) : 0.0) - v.pf;
          const Vec2 egf = (exact.grad_fluid ? exact.grad_fluid(x) : Vec2::Zero()) - v.gpf;
          r.fluid2 += w * (storage(params) * ef * ef + params.kappa / params.xi * egf.squaredNorm());
        }
      }
    }
  }
  if (ctx.elastic.mat) r.pressure_mean2 = pe.sq / ctx.elastic.mat->mu;
  if (ctx.poro.mat) r.total_pressure_mean2 = pp.sq / ctx.poro.mat->mu;
  return r;
}

double mean_free_l2_squared(const Mesh& mesh, const ScalarFunction& q, Subdomain where, int quad_order) {
  const QuadratureRule& rule = quadrature_rule(quad_order);
  double integral = 0.0, area = 0.0;
  for (int pass = 0; pass < 2; ++pass) {
    const double m = area > 0 ? integral / area : 0.0;
    double sq = 0.0;
    for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
      if (!in_restriction(mesh, c, where)) continue;
      const AffineMap map(mesh.vertex(c, 0), mesh.vertex(c, 1), mesh.vertex(c, 2));
      for (std::size_t i = 0; i < rule.size(); ++i) {
        const double w = rule.weights[i] * std::abs(map.det);
        const double v = q(map.to_physical(rule.points[i]));
        if (pass == 0) {
          integral += w * v;
          area += w;
        } else {
          sq += w * (v - m) * (v - m);
        }
      }
    }
    if (pass == 1) return sq;
  }
  return 0.0;
}

double effectivity(double total_error, double estimator) {
  if (estimator > 0.0) return total_error / estimator;
  if (total_error == 0.0) return 0.0;
  std::clog << "warning: estimator vanishes while the error is " << total_error << "; effectivity is infinite\n";
  return INFINITY;
}

void write_estimator_csv(const std::string& path, const EstimatorReport& report) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open " + path);
  out.imbue(std::locale::classic());
  out << "cell,indicator2,oscillation2\n" << std::setprecision(17);
  for (std::size_t c = 0; c < report.cell.size(); ++c)
    out << c << ',' << report.cell[c] << ',' << report.oscillation[c] << '\n';
}

CellData estimator_cell_data(const EstimatorReport& report) {
  CellData d;
  d["indicator2"] = report.cell;
  d["oscillation2"] = report.oscillation;
  d["momentum"] = report.terms.momentum;
  d["rotation"] = report.terms.rotation;
  d["divergence"] = report.terms.divergence;
  d["traction_jump"] = report.terms.traction;
  if (report.kind != ProblemKind::Elasticity) {
    d["mass"] = report.terms.mass;
    d["flux_jump"] = report.terms.flux;
  }
  return d;
}

}  // namespace rotafem
