#pragma once

#include "rotafem/linsolve.hpp"

#include <string>
#include <vector>

namespace rotafem {

struct EstimatorOptions {
  ExecPolicy policy = ExecPolicy::Parallel;
  /// Quadrature order for integrals involving non-polynomial data.
  int data_order = 10;
};

/// Per-cell squared contributions; they sum to EstimatorReport::cell.
struct EstimatorTerms {
  std::vector<double> momentum;    // h_K^2 / mu ||f_h - sqrt(mu) curl omega_h - grad p_h||^2
  std::vector<double> rotation;    // ||omega_h - sqrt(mu) curl u_h||^2
  std::vector<double> divergence;  // rho_d ||div u_h + ...||^2
  std::vector<double> mass;        // rho_1 ||R_4||^2 (poroelastic cells)
  std::vector<double> traction;    // sum_e h_e / (2 mu) ||[T]||^2, half of each interior edge
  std::vector<double> flux;        // sum_e rho_2 ||R_e||^2 (poroelastic cells), interior edges halved
};

struct EstimatorReport {
  ProblemKind kind = ProblemKind::Elasticity;
  std::vector<double> cell;            // Theta_K^2 or Psi_K^2
  std::vector<double> interface_edge;  // Lambda_e^2 per mesh edge, 0 off the interface
  std::vector<double> oscillation;     // per-cell oscillation^2
  EstimatorTerms terms;
  double estimator = 0.0;
  double global_oscillation = 0.0;

  /// Cell indicators with each Lambda_e^2 split half/half between its cells.
  std::vector<double> marking_indicators(const Mesh& mesh) const;
};

EstimatorReport elasticity_estimator(const Mesh& mesh, const FieldSolution& sol, const ProblemParams& params,
                                     const ProblemData& data, const EstimatorOptions& opts = {});
EstimatorReport biot_estimator(const Mesh& mesh, const FieldSolution& sol, const ProblemParams& params,
                               const ProblemData& data, const EstimatorOptions& opts = {});
EstimatorReport interface_estimator(const Mesh& mesh, const FieldSolution& sol, const ProblemParams& params,
                                    const ProblemData& data, const EstimatorOptions& opts = {});
/// Dispatches on sol.kind.
EstimatorReport estimate(const Mesh& mesh, const FieldSolution& sol, const ProblemParams& params,
                         const ProblemData& data, const EstimatorOptions& opts = {});

/// One incident cell's share (half) of an interior edge's jump terms,
/// evaluated with that cell's normal and edge parametrization; both cells
/// give the same values.
struct EdgeTerms {
  double traction = 0.0;
  double flux = 0.0;
};
EdgeTerms interior_edge_terms(const Mesh& mesh, const FieldSolution& sol, const ProblemParams& params, int edge,
                              int from_cell);

using MatrixFunction = std::function<Mat2(const Vec2&)>;

/// Exact fields with first derivatives. grad_u(i, j) = d u_i / d x_j.
struct ExactSolution {
  VectorFunction u;
  MatrixFunction grad_u;
  ScalarFunction omega_elastic;
  ScalarFunction pressure_elastic;
  ScalarFunction omega_poro;
  ScalarFunction total_pressure;
  ScalarFunction fluid_pressure;
  VectorFunction grad_fluid;
};

/// Squared error components in the weighted norms.
struct ErrorReport {
  double u2 = 0.0;                    // sum mu (||curl e||^2 + ||div e||^2)
  double omega2 = 0.0;                // ||omega - omega_h||^2
  double omega_elastic2 = 0.0;        // elastic-cell part of omega2
  double omega_poro2 = 0.0;           // poroelastic-cell part of omega2
  double pressure2 = 0.0;             // ||q||^2 / (2 mu + lambda), elastic pressure
  double pressure_mean2 = 0.0;        // ||q - mean q||^2 / mu
  double total_pressure2 = 0.0;       // ||psi||^2 / (2 mu + lambda)
  double total_pressure_mean2 = 0.0;  // ||psi - mean psi||^2 / mu
  double fluid2 = 0.0;                // (c0 + alpha^2/(2mu+lambda)) ||q||^2 + kappa/xi ||grad q||^2

  double e_u() const;
  double e_omega() const;
  double e_pressure(bool mean_term = true) const;
  double e_total_pressure(bool mean_term = true) const;
  double e_fluid() const;
  double total(bool mean_term = true) const;
};

ErrorReport triple_norm_error(const Mesh& mesh, const FieldSolution& sol, const ExactSolution& exact,
                              const ProblemParams& params, int quad_order = 10);

/// ||q - mean(q)||^2 over the cells of one subdomain (Whole = all cells).
double mean_free_l2_squared(const Mesh& mesh, const ScalarFunction& q, Subdomain where = Subdomain::Whole,
                            int quad_order = 10);

/// total_error / estimator; 0 for (0, 0); +inf with a warning when only the
/// estimator vanishes.
double effectivity(double total_error, double estimator);

/// CSV with columns cell,indicator2,oscillation2.
void write_estimator_csv(const std::string& path, const EstimatorReport& report);
CellData estimator_cell_data(const EstimatorReport& report);

}  // namespace rotafem
