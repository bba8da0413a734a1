#pragma once

#include "rotafem/mesh.hpp"
#include "rotafem/space.hpp"

#include <Eigen/Sparse>

#include <string>
#include <string_view>
#include <vector>

namespace rotafem {

/// Lame pair of one material.
struct Material {
  double mu = 0.4;
  double lambda = 0.4;

  static Material from_young(double E, double nu);
  double stiffness() const { return 2.0 * mu + lambda; }
};

struct ProblemParams {
  Material elastic = Material::from_young(1.0, 0.25);
  Material poro = Material::from_young(1.0, 0.25);
  double alpha = 1.0;
  double c0 = 1.0;
  double kappa = 1.0;
  double xi = 1.0;
  double rho = 1.0;
  Vec2 gravity = Vec2::Zero();
  bool stabilization = true;

  /// Throws InvalidArgument on non-finite or out-of-range values.
  void validate() const;
};

/// Trace data g(x, n) on an edge with unit normal n.
using TraceFunction = std::function<double(const Vec2&, const Vec2&)>;
using TraceVectorFunction = std::function<Vec2(const Vec2&, const Vec2&)>;

/// Loads and boundary data. Empty callables mean zero.
struct ProblemData {
  VectorFunction f_elastic;
  VectorFunction f_poro;
  ScalarFunction source;
  /// Fluid flux kappa/xi (grad p - rho g).n on the domain boundary, n outward.
  TraceFunction boundary_flux;
  /// Fluid flux through the interface, n pointing from Poro to Elastic.
  TraceFunction interface_flux;
  /// Traction mismatch T_P - T_E on the interface, T = phi n - sqrt(mu) omega x n.
  TraceVectorFunction interface_traction;
  /// Displacement on the domain boundary.
  VectorFunction dirichlet;
};

enum class ProblemKind { Elasticity, Biot, Interface };
const char* to_string(ProblemKind kind);

struct FieldBlock {
  std::string name;
  Space space;
  int offset = 0;
};

/// Field layout of one problem on one mesh.
///   elasticity: u, omega, p
///   biot:       u, omega, phi, pf
///   interface:  u, omega_p, phi_p, pf_p, omega_e, p_e
struct Discretization {
  ProblemKind kind = ProblemKind::Elasticity;
  int k = 0;
  std::vector<FieldBlock> fields;

  int num_dofs() const;
  bool has(std::string_view name) const;
  const FieldBlock& field(std::string_view name) const;
};

Discretization make_discretization(const Mesh& mesh, ProblemKind kind, int k);

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

struct FieldRange {
  std::string name;
  int begin = 0;
  int end = 0;
};

struct LinearSystem {
  SparseMatrix A;
  Eigen::VectorXd b;
  std::vector<FieldRange> partition;
};

struct AssemblyOptions {
  ExecPolicy policy = ExecPolicy::Parallel;
  /// Quadrature order for the bilinear forms; 0 selects 2 (k + 1) + 2.
  int matrix_order = 0;
  /// Quadrature order for load integrals of non-polynomial data.
  int data_order = 10;
  bool apply_dirichlet = true;
};

/// Dispatches on disc.kind.
LinearSystem assemble(const Mesh& mesh, const Discretization& disc, const ProblemParams& params,
                      const ProblemData& data, const AssemblyOptions& opts = {});

LinearSystem assemble_elasticity(const Mesh& mesh, const Discretization& disc, const ProblemParams& params,
                                 const ProblemData& data, const AssemblyOptions& opts = {});
LinearSystem assemble_biot(const Mesh& mesh, const Discretization& disc, const ProblemParams& params,
                           const ProblemData& data, const AssemblyOptions& opts = {});
LinearSystem assemble_interface(const Mesh& mesh, const Discretization& disc, const ProblemParams& params,
                                const ProblemData& data, const AssemblyOptions& opts = {});

struct DirichletSet {
  std::vector<int> dofs;
  std::vector<double> values;
};

/// Displacement dofs on the domain boundary with their prescribed values.
DirichletSet displacement_dirichlet(const Mesh& mesh, const Discretization& disc, const ProblemData& data);

/// Symmetric elimination: constrained rows and columns become identity,
/// their couplings move to the right-hand side.
LinearSystem apply_dirichlet(const LinearSystem& system, const DirichletSet& bc);

void write_matrix_market(const std::string& path, const SparseMatrix& A);

/// Stabilization weight h_e / mu of the material owning an interior edge.
double stabilization_weight(double h_e, const Material& m);

/// Edge class seen by one problem kind; interface edges are interior unless
/// the kind couples two subdomains.
EdgeClass edge_class_for(const Mesh& mesh, ProblemKind kind, int edge);

}  // namespace rotafem
