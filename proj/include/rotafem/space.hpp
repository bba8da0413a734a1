#pragma once

#include "rotafem/basis.hpp"
#include "rotafem/mesh.hpp"
#include "rotafem/quadrature.hpp"

#include <Eigen/Dense>

#include <vector>

namespace rotafem {

enum class Family { Continuous, Discontinuous };
enum class ValueShape { Scalar, Vector };

/// Lagrange finite-element space on (part of) a mesh.
///
/// Global dof = component * num_nodes + node. Local dofs are ordered the same
/// way: component * nodes_per_cell + local node. Cells outside the
/// restriction carry node index -1.
struct Space {
  Family family = Family::Continuous;
  int degree = 1;
  ValueShape shape = ValueShape::Scalar;
  Subdomain restriction = Subdomain::Whole;

  int nodes_per_cell = 0;
  int num_nodes = 0;
  std::vector<int> cell_nodes;
  std::vector<Vec2> node_coords;

  int components() const { return shape == ValueShape::Vector ? 2 : 1; }
  int dof_count() const { return components() * num_nodes; }
  int local_size() const { return components() * nodes_per_cell; }
  bool active(int cell) const { return cell_nodes[static_cast<std::size_t>(cell) * nodes_per_cell] >= 0; }
  int node(int cell, int i) const { return cell_nodes[static_cast<std::size_t>(cell) * nodes_per_cell + i]; }
  int dof(int cell, int comp, int i) const { return comp * num_nodes + node(cell, i); }
  /// Fills out[0 .. local_size()) with the cell's global dofs.
  void local_dofs(int cell, int* out) const;
};

/// Degree 0..2 for Discontinuous, 1..2 for Continuous. Restriction Whole
/// activates every cell, otherwise only cells with the matching tag.
Space build_space(const Mesh& mesh, Family family, int degree, ValueShape shape,
                  Subdomain restriction = Subdomain::Whole);

/// True when the cell belongs to the restriction.
bool in_restriction(const Mesh& mesh, int cell, Subdomain restriction);

struct BasisEval {
  std::vector<double> values;
  std::vector<Vec2> grads;
};

/// Scalar basis values and physical gradients on one cell.
BasisEval eval_basis(const Space& space, const Mesh& mesh, int cell, const Vec2& xi);

/// Nodal interpolation for Continuous spaces, local L2 fit otherwise.
Eigen::VectorXd interpolate(const Space& space, const Mesh& mesh, const ScalarFunction& f);
Eigen::VectorXd interpolate(const Space& space, const Mesh& mesh, const VectorFunction& f);

/// Cell-wise L2 projection (Discontinuous spaces only).
Eigen::VectorXd project_onto(const Space& space, const Mesh& mesh, const ScalarFunction& f,
                             int quad_order = 10);
Eigen::VectorXd project_onto(const Space& space, const Mesh& mesh, const VectorFunction& f,
                             int quad_order = 10);

/// Value (component comp) of a discrete function at a reference point.
double evaluate(const Space& space, const Mesh& mesh, const Eigen::VectorXd& coeffs, int cell,
                const Vec2& xi, int comp = 0);
/// Physical gradient of component comp.
Vec2 evaluate_grad(const Space& space, const Mesh& mesh, const Eigen::VectorXd& coeffs, int cell,
                   const Vec2& xi, int comp = 0);

/// Nodes of a Continuous space lying on Boundary edges (domain boundary).
std::vector<int> boundary_nodes(const Space& space, const Mesh& mesh);

/// ||f - g||_{0,K} summed over active cells, with g discrete.
double l2_distance(const Space& space, const Mesh& mesh, const Eigen::VectorXd& coeffs,
                   const ScalarFunction& f, int quad_order = 10);

}  // namespace rotafem
