#include "rotafem/forms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

namespace rotafem {

Material Material::from_young(double E, double nu) {
  if (!(E > 0.0) || !std::isfinite(E)) throw InvalidArgument("Young modulus must be positive and finite");
  if (!(nu >= 0.0 && nu < 0.5)) throw InvalidArgument("Poisson ratio must lie in [0, 1/2)");
  return {E / (2.0 * (1.0 + nu)), E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))};
}

void ProblemParams::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  for (const Material* m : {&elastic, &poro}) {
    if (!finite(m->mu) || !(m->mu > 0.0)) throw InvalidArgument("mu must be positive and finite");
    if (!finite(m->lambda) || m->lambda < 0.0) throw InvalidArgument("lambda must be non-negative and finite");
  }
  if (!finite(kappa) || !(kappa > 0.0)) throw InvalidArgument("kappa must be positive");
  if (!finite(xi) || !(xi > 0.0)) throw InvalidArgument("xi must be positive");
  if (!finite(c0) || c0 < 0.0) throw InvalidArgument("c0 must be non-negative");
  if (!finite(alpha) || !(alpha > 0.0) || alpha > 1.0) throw InvalidArgument("alpha must lie in (0, 1]");
  if (!finite(rho) || !finite(gravity.x()) || !finite(gravity.y())) throw InvalidArgument("rho and g must be finite");
}

const char* to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Elasticity: return "elasticity";
    case ProblemKind::Biot: return "biot";
    case ProblemKind::Interface: return "interface";
  }
  return "?";
}

int Discretization::num_dofs() const {
  int n = 0;
  for (const auto& f : fields) n += f.space.dof_count();
  return n;
}

bool Discretization::has(std::string_view name) const {
  return std::any_of(fields.begin(), fields.end(), [&](const FieldBlock& f) { return f.name == name; });
}

const FieldBlock& Discretization::field(std::string_view name) const {
  for (const auto& f : fields)
    if (f.name == name) return f;
  throw InvalidArgument("unknown field " + std::string(name));
}

Discretization make_discretization(const Mesh& mesh, ProblemKind kind, int k) {
  if (k < 0 || k > 1) throw InvalidArgument("polynomial degree k must be 0 or 1");
  Discretization d;
  d.kind = kind;
  d.k = k;
  auto add = [&](const std::string& name, Family fam, int deg, ValueShape shape, Subdomain r) {
    FieldBlock f{name, build_space(mesh, fam, deg, shape, r), d.num_dofs()};
    d.fields.push_back(std::move(f));
  };
  const auto C = Family::Continuous, D = Family::Discontinuous;
  const auto S = ValueShape::Scalar, V = ValueShape::Vector;
  const auto W = Subdomain::Whole;
  switch (kind) {
    case ProblemKind::Elasticity:
      add("u", C, k + 1, V, W);
      add("omega", D, k, S, W);
      add("p", D, k, S, W);
      break;
    case ProblemKind::Biot:
      add("u", C, k + 1, V, W);
      add("omega", D, k, S, W);
      add("phi", D, k, S, W);
      add("pf", C, k + 1, S, W);
      break;
    case ProblemKind::Interface:
      if (!mesh.has_interface()) throw InvalidArgument("interface problem needs a partitioned mesh");
      for (auto s : mesh.cell_subdomain)
        if (s == Subdomain::Whole) throw InvalidArgument("interface problem needs every cell tagged");
      add("u", C, k + 1, V, W);
      add("omega_p", D, k, S, Subdomain::Poro);
      add("phi_p", D, k, S, Subdomain::Poro);
      add("pf_p", C, k + 1, S, Subdomain::Poro);
      add("omega_e", D, k, S, Subdomain::Elastic);
      add("p_e", D, k, S, Subdomain::Elastic);
      break;
  }
  return d;
}

double stabilization_weight(double h_e, const Material& m) { return h_e / m.mu; }

EdgeClass edge_class_for(const Mesh& mesh, ProblemKind kind, int edge) {
  const EdgeClass c = mesh.edge_class[edge];
  return c == EdgeClass::Interface && kind != ProblemKind::Interface ? EdgeClass::Interior : c;
}

namespace {

// Which physics a cell carries and where its fields live.
struct CellPhysics {
  bool poro = false;
  const FieldBlock* u = nullptr;
  const FieldBlock* omega = nullptr;
  const FieldBlock* pressure = nullptr;  // p (elastic) or phi (poro)
  const FieldBlock* fluid = nullptr;     // poro only
  const Material* mat = nullptr;
};

struct PhysicsTable {
  CellPhysics elastic, poro;
  bool interface = false;
  ProblemKind kind = ProblemKind::Elasticity;

  PhysicsTable(const Discretization& d, const ProblemParams& p) : kind(d.kind) {
    switch (d.kind) {
      case ProblemKind::Elasticity:
        elastic = {false, &d.field("u"), &d.field("omega"), &d.field("p"), nullptr, &p.elastic};
        break;
      case ProblemKind::Biot:
        poro = {true, &d.field("u"), &d.field("omega"), &d.field("phi"), &d.field("pf"), &p.poro};
        break;
      case ProblemKind::Interface:
        interface = true;
        elastic = {false, &d.field("u"), &d.field("omega_e"), &d.field("p_e"), nullptr, &p.elastic};
        poro = {true, &d.field("u"), &d.field("omega_p"), &d.field("phi_p"), &d.field("pf_p"), &p.poro};
        break;
    }
  }

  const CellPhysics& at(const Mesh& m, int cell) const {
    switch (kind) {
      case ProblemKind::Elasticity: return elastic;
      case ProblemKind::Biot: return poro;
      case ProblemKind::Interface: return m.cell_subdomain[cell] == Subdomain::Poro ? poro : elastic;
    }
    return elastic;
  }
};

// Local layout: [u_x (nu), u_y (nu), omega (nw), pressure (nw), fluid (nu, poro only)].
struct LocalLayout {
  int nu = 0, nw = 0;
  int om = 0, pr = 0, pf = -1, size = 0;

  LocalLayout(int k, bool poro) {
    nu = lagrange_dim(k + 1);
    nw = lagrange_dim(k);
    om = 2 * nu;
    pr = om + nw;
    size = pr + nw;
    if (poro) {
      pf = size;
      size += nu;
    }
  }
};

void local_dofs(const CellPhysics& ph, const LocalLayout& L, int cell, int* out) {
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < L.nu; ++i) out[c * L.nu + i] = ph.u->offset + ph.u->space.dof(cell, c, i);
  for (int i = 0; i < L.nw; ++i) {
    out[L.om + i] = ph.omega->offset + ph.omega->space.dof(cell, 0, i);
    out[L.pr + i] = ph.pressure->offset + ph.pressure->space.dof(cell, 0, i);
  }
  if (ph.poro)
    for (int i = 0; i < L.nu; ++i) out[L.pf + i] = ph.fluid->offset + ph.fluid->space.dof(cell, 0, i);
}

// curl and div of the vector test function phi_i e_c.
inline double curl_comp(int c, const Vec2& g) { return c == 0 ? -g.y() : g.x(); }
inline double div_comp(int c, const Vec2& g) { return c == 0 ? g.x() : g.y(); }

struct Tables {
  const QuadratureRule* rule;
  BasisTable u, w;
  const QuadratureRule* data_rule;
  BasisTable u_data;
};

void cell_matrix(const Mesh& mesh, int cell, const CellPhysics& ph, const ProblemParams& P,
                 const LocalLayout& L, const Tables& T, Eigen::MatrixXd& A) {
  A.setZero(L.size, L.size);
  const AffineMap map(mesh.vertex(cell, 0), mesh.vertex(cell, 1), mesh.vertex(cell, 2));
  const double det = std::abs(map.det);
  const Material& m = *ph.mat;
  const double smu = std::sqrt(m.mu), inv_s = 1.0 / m.stiffness();
  Vec2 gu[6];
  for (std::size_t q = 0; q < T.rule->size(); ++q) {
    const double w = T.rule->weights[q] * det;
    for (int i = 0; i < L.nu; ++i) gu[i] = map.grad(T.u.g(q, i));
    for (int c = 0; c < 2; ++c) {
      for (int a = 0; a < L.nu; ++a) {
        const int ra = c * L.nu + a;
        const double cu = curl_comp(c, gu[a]), du = div_comp(c, gu[a]);
        for (int j = 0; j < L.nw; ++j) {
          const double wj = T.w.v(q, j);
          // -sqrt(mu) (curl v, omega) + (pressure, div v)
          A(ra, L.om + j) -= w * smu * cu * wj;
          A(ra, L.pr + j) += w * du * wj;
          // -sqrt(mu) (theta, curl u) + (div u, q)
          A(L.om + j, ra) -= w * smu * cu * wj;
          A(L.pr + j, ra) += w * du * wj;
        }
      }
    }
    for (int i = 0; i < L.nw; ++i)
      for (int j = 0; j < L.nw; ++j) {
        const double mij = w * (T.w.v(q, i) * T.w.v(q, j));
        A(L.om + i, L.om + j) += mij;
        A(L.pr + i, L.pr + j) += inv_s * mij;
      }
    if (!ph.poro) continue;
    const double ab = P.alpha * inv_s;
    const double cc = P.c0 + P.alpha * P.alpha * inv_s;
    const double kx = P.kappa / P.xi;
    for (int i = 0; i < L.nw; ++i)
      for (int j = 0; j < L.nu; ++j) {
        const double mij = w * T.w.v(q, i) * T.u.v(q, j);
        A(L.pr + i, L.pf + j) -= ab * mij;  // -b2(theta, p)
        A(L.pf + j, L.pr + i) += ab * mij;  // +b2(omega, q)
      }
    for (int i = 0; i < L.nu; ++i)
      for (int j = 0; j < L.nu; ++j)
        A(L.pf + i, L.pf + j) -= w * (cc * (T.u.v(q, i) * T.u.v(q, j)) + kx * gu[i].dot(gu[j]));
  }
}

void cell_load(const Mesh& mesh, int cell, const CellPhysics& ph, const ProblemParams& P,
               const ProblemData& D, const LocalLayout& L, const Tables& T, Eigen::VectorXd& b) {
  b.setZero(L.size);
  const VectorFunction& f = ph.poro ? D.f_poro : D.f_elastic;
  const bool has_g = ph.poro && P.gravity.squaredNorm() > 0.0;
  if (!f && !(ph.poro && (D.source || has_g))) return;
  const AffineMap map(mesh.vertex(cell, 0), mesh.vertex(cell, 1), mesh.vertex(cell, 2));
  const double det = std::abs(map.det);
  for (std::size_t q = 0; q < T.data_rule->size(); ++q) {
    const double w = T.data_rule->weights[q] * det;
    const Vec2 x = map.to_physical(T.data_rule->points[q]);
    if (f) {
      const Vec2 fx = f(x);
      for (int c = 0; c < 2; ++c)
        for (int a = 0; a < L.nu; ++a) b(c * L.nu + a) -= w * fx[c] * T.u_data.v(q, a);
    }
    if (ph.poro) {
      const double s = D.source ? D.source(x) : 0.0;
      const Vec2 kg = (P.rho / P.xi) * P.kappa * P.gravity;
      for (int a = 0; a < L.nu; ++a) {
        double val = -s * T.u_data.v(q, a);
        if (has_g) val -= kg.dot(map.grad(T.u_data.g(q, a)));
        b(L.pf + a) += w * val;
      }
    }
  }
}

// Outward unit normal of the edge opposite local vertex i of a CCW cell.
Vec2 outward_normal(const Mesh& mesh, int cell, int i) {
  const Vec2 t = mesh.vertex(cell, (i + 2) % 3) - mesh.vertex(cell, (i + 1) % 3);
  return Vec2(t.y(), -t.x()).normalized();
}

int local_index_of_edge(const Mesh& mesh, int cell, int edge) {
  for (int i = 0; i < 3; ++i)
    if (mesh.cell_edges[cell][i] == edge) return i;
  throw TopologyError("edge not found in its cell");
}

void emit(std::vector<Eigen::Triplet<double>>& trips, const int* dofs, int n, const Eigen::MatrixXd& A) {
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (A(i, j) != 0.0) trips.emplace_back(dofs[i], dofs[j], A(i, j));
}

void check_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) throw InvalidArgument(std::string("non-finite values in ") + what);
}

}  // namespace

LinearSystem assemble(const Mesh& mesh, const Discretization& disc, const ProblemParams& params,
                      const ProblemData& data, const AssemblyOptions& opts) {
  params.validate();
  for (const auto& f : disc.fields)
    if (static_cast<std::size_t>(f.space.cell_nodes.size()) !=
        mesh.num_cells() * static_cast<std::size_t>(f.space.nodes_per_cell))
      throw InvalidArgument("assemble: space was built on a different mesh");

  const PhysicsTable phys(disc, params);
  const int k = disc.k;
  const int mo = opts.matrix_order > 0 ? opts.matrix_order : 2 * (k + 1) + 2;
  Tables T;
  T.rule = &quadrature_rule(mo);
  T.u = tabulate(k + 1, T.rule->points);
  T.w = tabulate(k, T.rule->points);
  T.data_rule = &quadrature_rule(std::max(opts.data_order, mo));
  T.u_data = tabulate(k + 1, T.data_rule->points);

  const int n = disc.num_dofs();
  const int nc = static_cast<int>(mesh.num_cells());
  LinearSystem sys;
  sys.b = Eigen::VectorXd::Zero(n);
  for (const auto& f : disc.fields) sys.partition.push_back({f.name, f.offset, f.offset + f.space.dof_count()});

  std::vector<Eigen::Triplet<double>> trips;
  const LocalLayout Le(k, false), Lp(k, true);
  trips.reserve(static_cast<std::size_t>(nc) * (disc.kind == ProblemKind::Elasticity ? 170 : 240));

  // Local work runs in fixed-size chunks: parallel compute, serial emission in
  // cell order, so the triplet stream is identical for every thread count.
  constexpr int kChunk = 2048;
  std::vector<Eigen::MatrixXd> Aloc(kChunk);
  std::vector<Eigen::VectorXd> bloc(kChunk);
  std::vector<std::array<int, 32>> dofs(kChunk);
  const bool par = opts.policy == ExecPolicy::Parallel;
  for (int start = 0; start < nc; start += kChunk) {
    const int stop = std::min(nc, start + kChunk);
#pragma omp parallel for schedule(static) if (par)
    for (int c = start; c < stop; ++c) {
      const CellPhysics& ph = phys.at(mesh, c);
      const LocalLayout& L = ph.poro ? Lp : Le;
      cell_matrix(mesh, c, ph, params, L, T, Aloc[c - start]);
      cell_load(mesh, c, ph, params, data, L, T, bloc[c - start]);
      local_dofs(ph, L, c, dofs[c - start].data());
    }
    for (int c = start; c < stop; ++c) {
      const CellPhysics& ph = phys.at(mesh, c);
      const int size = (ph.poro ? Lp : Le).size;
      emit(trips, dofs[c - start].data(), size, Aloc[c - start]);
      for (int i = 0; i < size; ++i) sys.b(dofs[c - start][i]) += bloc[c - start](i);
    }
  }

  // Edge terms.
  const LineRule& er = edge_rule(2 * k + 3);
  const LineRule& er_data = edge_rule(std::max(2 * k + 3, opts.data_order));
  const int nw = lagrange_dim(k), nu = lagrange_dim(k + 1);
  const LagrangeBasis& bw = lagrange_basis(k);
  const LagrangeBasis& bu = lagrange_basis(k + 1);
  for (int e = 0; e < static_cast<int>(mesh.num_edges()); ++e) {
    const Edge& ed = mesh.edges[e];
    const EdgeClass cls = edge_class_for(mesh, disc.kind, e);
    const Vec2 a = mesh.vertices[ed.v[0]], bpt = mesh.vertices[ed.v[1]];
    const double len = (bpt - a).norm();

    if (cls == EdgeClass::Interior && params.stabilization) {
      const int c0 = ed.cells[0], c1 = ed.cells[1];
      const CellPhysics& ph = phys.at(mesh, c0);
      const double wgt = stabilization_weight(len, *ph.mat);
      const AffineMap m0(mesh.vertex(c0, 0), mesh.vertex(c0, 1), mesh.vertex(c0, 2));
      const AffineMap m1(mesh.vertex(c1, 0), mesh.vertex(c1, 1), mesh.vertex(c1, 2));
      Eigen::MatrixXd S = Eigen::MatrixXd::Zero(2 * nw, 2 * nw);
      double v0[6], v1[6];
      for (std::size_t q = 0; q < er.points.size(); ++q) {
        const Vec2 x = a + er.points[q] * (bpt - a);
        bw.values(m0.to_reference(x), v0);
        bw.values(m1.to_reference(x), v1);
        double jump[12];
        for (int i = 0; i < nw; ++i) {
          jump[i] = v0[i];
          jump[nw + i] = -v1[i];
        }
        const double w = er.weights[q] * len * wgt;
        for (int i = 0; i < 2 * nw; ++i)
          for (int j = 0; j < 2 * nw; ++j) S(i, j) += w * (jump[i] * jump[j]);
      }
      int ed_dofs[12];
      for (int i = 0; i < nw; ++i) {
        ed_dofs[i] = ph.pressure->offset + ph.pressure->space.dof(c0, 0, i);
        ed_dofs[nw + i] = ph.pressure->offset + ph.pressure->space.dof(c1, 0, i);
      }
      emit(trips, ed_dofs, 2 * nw, S);
      continue;
    }

    if (cls == EdgeClass::Boundary) {
      const int c = ed.cells[0];
      const CellPhysics& ph = phys.at(mesh, c);
      if (!ph.poro || !data.boundary_flux) continue;
      const Vec2 nrm = outward_normal(mesh, c, local_index_of_edge(mesh, c, e));
      const AffineMap map(mesh.vertex(c, 0), mesh.vertex(c, 1), mesh.vertex(c, 2));
      double v[6];
      for (std::size_t q = 0; q < er_data.points.size(); ++q) {
        const Vec2 x = a + er_data.points[q] * (bpt - a);
        const double g = data.boundary_flux(x, nrm);
        bu.values(map.to_reference(x), v);
        for (int i = 0; i < nu; ++i)
          sys.b(ph.fluid->offset + ph.fluid->space.dof(c, 0, i)) -= er_data.weights[q] * len * g * v[i];
      }
      continue;
    }

    if (cls == EdgeClass::Interface) {
      if (!data.interface_flux && !data.interface_traction) continue;
      const int cp = mesh.cell_subdomain[ed.cells[0]] == Subdomain::Poro ? ed.cells[0] : ed.cells[1];
      const CellPhysics& ph = phys.at(mesh, cp);
      if (!ph.poro) continue;
      const Vec2 nrm = outward_normal(mesh, cp, local_index_of_edge(mesh, cp, e));
      const AffineMap map(mesh.vertex(cp, 0), mesh.vertex(cp, 1), mesh.vertex(cp, 2));
      double v[6];
      for (std::size_t q = 0; q < er_data.points.size(); ++q) {
        const Vec2 x = a + er_data.points[q] * (bpt - a);
        const double w = er_data.weights[q] * len;
        bu.values(map.to_reference(x), v);
        if (data.interface_flux) {
          const double g = data.interface_flux(x, nrm);
          for (int i = 0; i < nu; ++i) sys.b(ph.fluid->offset + ph.fluid->space.dof(cp, 0, i)) -= w * g * v[i];
        }
        if (data.interface_traction) {
          const Vec2 J = data.interface_traction(x, nrm);
          for (int c = 0; c < 2; ++c)
            for (int i = 0; i < nu; ++i) sys.b(ph.u->offset + ph.u->space.dof(cp, c, i)) += w * J[c] * v[i];
        }
      }
    }
  }

  sys.A.resize(n, n);
  sys.A.setFromTriplets(trips.begin(), trips.end());
  sys.A.prune([](int, int, double v) { return v != 0.0; });
  sys.A.makeCompressed();
  check_finite(sys.b, "load vector");
  for (int i = 0; i < sys.A.nonZeros(); ++i)
    if (!std::isfinite(sys.A.valuePtr()[i])) throw InvalidArgument("non-finite matrix entry");

  if (opts.apply_dirichlet) return apply_dirichlet(sys, displacement_dirichlet(mesh, disc, data));
  return sys;
}

LinearSystem assemble_elasticity(const Mesh& mesh, const Discretization& disc, const ProblemParams& params,
                                 const ProblemData& data, const AssemblyOptions& opts) {
  if (disc.kind != ProblemKind::Elasticity) throw InvalidArgument("assemble_elasticity: wrong discretization");
  return assemble(mesh, disc, params, data, opts);
}

LinearSystem assemble_biot(const Mesh& mesh, const Discretization& disc, const ProblemParams& params,
                           const ProblemData& data, const AssemblyOptions& opts) {
  if (disc.kind != ProblemKind::Biot) throw InvalidArgument("assemble_biot: wrong discretization");
  return assemble(mesh, disc, params, data, opts);
}

LinearSystem assemble_interface(const Mesh& mesh, const Discretization& disc, const ProblemParams& params,
                                const ProblemData& data, const AssemblyOptions& opts) {
  if (disc.kind != ProblemKind::Interface) throw InvalidArgument("assemble_interface: wrong discretization");
  if (!mesh.has_interface()) throw InvalidArgument("assemble_interface: mesh has no interface edges");
  return assemble(mesh, disc, params, data, opts);
}

DirichletSet displacement_dirichlet(const Mesh& mesh, const Discretization& disc, const ProblemData& data) {
  const FieldBlock& u = disc.field("u");
  DirichletSet bc;
  for (int node : boundary_nodes(u.space, mesh)) {
    const Vec2 val = data.dirichlet ? data.dirichlet(u.space.node_coords[node]) : Vec2::Zero();
    for (int c = 0; c < 2; ++c) {
      bc.dofs.push_back(u.offset + c * u.space.num_nodes + node);
      bc.values.push_back(val[c]);
    }
  }
  return bc;
}

LinearSystem apply_dirichlet(const LinearSystem& system, const DirichletSet& bc) {
  const int n = static_cast<int>(system.A.rows());
  std::vector<double> fixed(n, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::uint8_t> is_fixed(n, 0);
  for (std::size_t i = 0; i < bc.dofs.size(); ++i) {
    if (bc.dofs[i] < 0 || bc.dofs[i] >= n) throw InvalidArgument("apply_dirichlet: dof out of range");
    is_fixed[bc.dofs[i]] = 1;
    fixed[bc.dofs[i]] = bc.values[i];
  }
  LinearSystem out;
  out.partition = system.partition;
  out.b = system.b;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(system.A.nonZeros() + bc.dofs.size());
  for (int r = 0; r < n; ++r) {
    if (is_fixed[r]) {
      trips.emplace_back(r, r, 1.0);
      out.b(r) = fixed[r];
      continue;
    }
    for (SparseMatrix::InnerIterator it(system.A, r); it; ++it) {
      if (is_fixed[it.col()])
        out.b(r) -= it.value() * fixed[it.col()];
      else
        trips.emplace_back(r, it.col(), it.value());
    }
  }
  out.A.resize(n, n);
  out.A.setFromTriplets(trips.begin(), trips.end());
  out.A.makeCompressed();
  return out;
}

void write_matrix_market(const std::string& path, const SparseMatrix& A) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open " + path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << A.rows() << ' ' << A.cols() << ' ' << A.nonZeros() << '\n';
  out << std::setprecision(17);
  for (int r = 0; r < A.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(A, r); it; ++it) out << r + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

}  // namespace rotafem
