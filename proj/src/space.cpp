#include "rotafem/space.hpp"

#include <cmath>

namespace rotafem {

bool in_restriction(const Mesh& mesh, int cell, Subdomain restriction) {
  return restriction == Subdomain::Whole || mesh.cell_subdomain[cell] == restriction;
}

void Space::local_dofs(int cell, int* out) const {
  for (int c = 0; c < components(); ++c)
    for (int i = 0; i < nodes_per_cell; ++i) out[c * nodes_per_cell + i] = dof(cell, c, i);
}

Space build_space(const Mesh& mesh, Family family, int degree, ValueShape shape,
                  Subdomain restriction) {
  if (family == Family::Continuous && (degree < 1 || degree > 2))
    throw InvalidArgument("build_space: continuous spaces need degree 1 or 2");
  if (family == Family::Discontinuous && (degree < 0 || degree > 2))
    throw InvalidArgument("build_space: discontinuous spaces need degree 0, 1 or 2");
  if (mesh.edges.empty() && mesh.num_cells() > 0)
    throw InvalidArgument("build_space: mesh edges not classified");

  Space s;
  s.family = family;
  s.degree = degree;
  s.shape = shape;
  s.restriction = restriction;
  s.nodes_per_cell = lagrange_dim(degree);
  const int nc = static_cast<int>(mesh.num_cells());
  s.cell_nodes.assign(static_cast<std::size_t>(nc) * s.nodes_per_cell, -1);
  const auto& ref_nodes = lagrange_basis(degree).nodes();

  if (family == Family::Discontinuous) {
    int next = 0;
    for (int c = 0; c < nc; ++c) {
      if (!in_restriction(mesh, c, restriction)) continue;
      const AffineMap map(mesh.vertex(c, 0), mesh.vertex(c, 1), mesh.vertex(c, 2));
      for (int i = 0; i < s.nodes_per_cell; ++i) {
        s.cell_nodes[c * s.nodes_per_cell + i] = next++;
        s.node_coords.push_back(map.to_physical(ref_nodes[i]));
      }
    }
    s.num_nodes = next;
    return s;
  }

  std::vector<int> vnode(mesh.num_vertices(), -1), enode(mesh.num_edges(), -1);
  int next = 0;
  for (int c = 0; c < nc; ++c) {
    if (!in_restriction(mesh, c, restriction)) continue;
    for (int i = 0; i < 3; ++i) {
      const int v = mesh.cells[c][i];
      if (vnode[v] < 0) {
        vnode[v] = next++;
        s.node_coords.push_back(mesh.vertices[v]);
      }
    }
  }
  if (degree == 2) {
    for (int c = 0; c < nc; ++c) {
      if (!in_restriction(mesh, c, restriction)) continue;
      for (int i = 0; i < 3; ++i) {
        const int e = mesh.cell_edges[c][i];
        if (enode[e] < 0) {
          enode[e] = next++;
          const Edge& ed = mesh.edges[e];
          s.node_coords.push_back(0.5 * (mesh.vertices[ed.v[0]] + mesh.vertices[ed.v[1]]));
        }
      }
    }
  }
  s.num_nodes = next;
  for (int c = 0; c < nc; ++c) {
    if (!in_restriction(mesh, c, restriction)) continue;
    int* row = &s.cell_nodes[c * s.nodes_per_cell];
    for (int i = 0; i < 3; ++i) row[i] = vnode[mesh.cells[c][i]];
    if (degree == 2)
      for (int i = 0; i < 3; ++i) row[3 + i] = enode[mesh.cell_edges[c][i]];
  }
  return s;
}

BasisEval eval_basis(const Space& space, const Mesh& mesh, int cell, const Vec2& xi) {
  const LagrangeBasis& b = lagrange_basis(space.degree);
  const AffineMap map(mesh.vertex(cell, 0), mesh.vertex(cell, 1), mesh.vertex(cell, 2));
  BasisEval out;
  out.values.resize(b.size());
  out.grads.resize(b.size());
  b.values(xi, out.values.data());
  b.gradients(xi, out.grads.data());
  for (auto& g : out.grads) g = map.grad(g);
  return out;
}

namespace {

// Local L2 fit on each active cell; fill(cell, x, comp) gives the target.
template <class F>
Eigen::VectorXd local_projection(const Space& space, const Mesh& mesh, int quad_order, F&& target) {
  const QuadratureRule& rule = quadrature_rule(quad_order);
  const BasisTable tab = tabulate(space.degree, rule.points);
  const int n = space.nodes_per_cell;
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t q = 0; q < rule.size(); ++q)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) mass(i, j) += rule.weights[q] * tab.v(q, i) * tab.v(q, j);
  // The reference mass matrix scales with |det B|, which cancels in the solve.
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(mass);

  Eigen::VectorXd out = Eigen::VectorXd::Zero(space.dof_count());
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
    if (!space.active(c)) continue;
    const AffineMap map(mesh.vertex(c, 0), mesh.vertex(c, 1), mesh.vertex(c, 2));
    for (int comp = 0; comp < space.components(); ++comp) {
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const double fx = target(c, map.to_physical(rule.points[q]), comp);
        for (int i = 0; i < n; ++i) rhs(i) += rule.weights[q] * fx * tab.v(q, i);
      }
      const Eigen::VectorXd x = ldlt.solve(rhs);
      for (int i = 0; i < n; ++i) out(space.dof(c, comp, i)) = x(i);
    }
  }
  return out;
}

}  // namespace

Eigen::VectorXd project_onto(const Space& space, const Mesh& mesh, const ScalarFunction& f,
                             int quad_order) {
  if (space.family != Family::Discontinuous)
    throw InvalidArgument("project_onto: cell-wise projection needs a discontinuous space");
  if (space.components() != 1) throw InvalidArgument("project_onto: scalar function on vector space");
  return local_projection(space, mesh, quad_order,
                          [&](int, const Vec2& x, int) { return f(x); });
}

Eigen::VectorXd project_onto(const Space& space, const Mesh& mesh, const VectorFunction& f,
                             int quad_order) {
  if (space.family != Family::Discontinuous)
    throw InvalidArgument("project_onto: cell-wise projection needs a discontinuous space");
  if (space.components() != 2) throw InvalidArgument("project_onto: vector function on scalar space");
  return local_projection(space, mesh, quad_order,
                          [&](int, const Vec2& x, int comp) { return f(x)[comp]; });
}

Eigen::VectorXd interpolate(const Space& space, const Mesh& mesh, const ScalarFunction& f) {
  if (space.components() != 1) throw InvalidArgument("interpolate: scalar function on vector space");
  if (space.family == Family::Discontinuous) return project_onto(space, mesh, f);
  Eigen::VectorXd out(space.dof_count());
  for (int i = 0; i < space.num_nodes; ++i) out(i) = f(space.node_coords[i]);
  return out;
}

Eigen::VectorXd interpolate(const Space& space, const Mesh& mesh, const VectorFunction& f) {
  if (space.components() != 2) throw InvalidArgument("interpolate: vector function on scalar space");
  if (space.family == Family::Discontinuous) return project_onto(space, mesh, f);
  Eigen::VectorXd out(space.dof_count());
  for (int i = 0; i < space.num_nodes; ++i) {
    const Vec2 v = f(space.node_coords[i]);
    out(i) = v.x();
    out(space.num_nodes + i) = v.y();
  }
  return out;
}

double evaluate(const Space& space, const Mesh& mesh, const Eigen::VectorXd& coeffs, int cell,
                const Vec2& xi, int comp) {
  if (!space.active(cell)) throw InvalidArgument("evaluate: cell outside the space restriction");
  (void)mesh;
  const LagrangeBasis& b = lagrange_basis(space.degree);
  double vals[6];
  b.values(xi, vals);
  double s = 0.0;
  for (int i = 0; i < space.nodes_per_cell; ++i) s += coeffs(space.dof(cell, comp, i)) * vals[i];
  return s;
}

Vec2 evaluate_grad(const Space& space, const Mesh& mesh, const Eigen::VectorXd& coeffs, int cell,
                   const Vec2& xi, int comp) {
  const BasisEval e = eval_basis(space, mesh, cell, xi);
  Vec2 g = Vec2::Zero();
  for (int i = 0; i < space.nodes_per_cell; ++i) g += coeffs(space.dof(cell, comp, i)) * e.grads[i];
  return g;
}

std::vector<int> boundary_nodes(const Space& space, const Mesh& mesh) {
  if (space.family != Family::Continuous) return {};
  std::vector<std::uint8_t> mark(space.num_nodes, 0);
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
    if (!space.active(c)) continue;
    for (int i = 0; i < 3; ++i) {
      const int e = mesh.cell_edges[c][i];
      if (mesh.edge_class[e] != EdgeClass::Boundary) continue;
      // Edge opposite vertex i has vertices (i+1, i+2) and midpoint node 3+i.
      mark[space.node(c, (i + 1) % 3)] = 1;
      mark[space.node(c, (i + 2) % 3)] = 1;
      if (space.degree == 2) mark[space.node(c, 3 + i)] = 1;
    }
  }
  std::vector<int> out;
  for (int i = 0; i < space.num_nodes; ++i)
    if (mark[i]) out.push_back(i);
  return out;
}

double l2_distance(const Space& space, const Mesh& mesh, const Eigen::VectorXd& coeffs,
                   const ScalarFunction& f, int quad_order) {
  const QuadratureRule& rule = quadrature_rule(quad_order);
  const BasisTable tab = tabulate(space.degree, rule.points);
  double sum = 0.0;
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
    if (!space.active(c)) continue;
    const AffineMap map(mesh.vertex(c, 0), mesh.vertex(c, 1), mesh.vertex(c, 2));
    for (std::size_t q = 0; q < rule.size(); ++q) {
      double uh = 0.0;
      for (int i = 0; i < space.nodes_per_cell; ++i) uh += coeffs(space.dof(c, 0, i)) * tab.v(q, i);
      const double d = f(map.to_physical(rule.points[q])) - uh;
      sum += rule.weights[q] * std::abs(map.det) * d * d;
    }
  }
  return std::sqrt(sum);
}

}  // namespace rotafem
