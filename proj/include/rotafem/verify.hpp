#pragma once

#include "rotafem/adapt.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace rotafem {

/// Displacement of the square case.
///   Printed:        u = (pi sin^2(pi x) sin(pi y) cos(pi y), -pi sin(pi x) cos(pi y) sin^2(pi y)) + p/(2 lambda) (1, 1)
///   StreamFunction: u = curl(sin^2(pi x) sin^2(pi y)) / 2 + p/(2 lambda) (1, 1)
enum class Variant { Printed, StreamFunction };
const char* to_string(Variant v);
Variant parse_variant(const std::string& s);

enum class Geometry { Square, LShape };
const char* to_string(Geometry g);

/// Second derivatives the data are built from.
struct SecondOrder {
  VectorFunction grad_curl_u;
  VectorFunction grad_div_u;
  ScalarFunction laplace_fluid;
};

struct ManufacturedCase {
  std::string name;
  ProblemKind kind = ProblemKind::Elasticity;
  Geometry geometry = Geometry::Square;
  Partition partition = Partition::None;
  Variant variant = Variant::Printed;
  double a = 1.0;
  ProblemParams params;
  ExactSolution exact;
  SecondOrder second;
  ProblemData data;

  /// Level mesh with n squares per unit length; the L-shape squares are
  /// criss-crossed (n = 1 gives 12 cells).
  Mesh mesh(int n) const;
  ProblemSetup setup(int k, ExecPolicy policy = ExecPolicy::Parallel) const;
};

/// Unit square; p = xy(1-x)(a-y). Interface: porous below y = 1/2.
ManufacturedCase case_square(ProblemKind kind, const ProblemParams& params, double a = 1.0,
                             Variant variant = Variant::Printed);

/// L-shape (-1,1)^2 minus (0,1)^2, p = exp(-25 r^2), u = exp(-50 r^2) (1, 1).
/// Interface: the diagonal from (0,0) to (-1,-1), porous above it.
ManufacturedCase case_lshape(const ProblemParams& params, ProblemKind kind = ProblemKind::Interface);
ProblemParams lshape_params();

/// Material and coupling parameters from Young's modulus and Poisson ratio
/// (both subdomains), all others 1 and g = 0.
ProblemParams square_params(double E, double nu, double kappa = 1.0);

struct SelfCheck {
  double strong_residual = 0.0;   // relative, coded derivatives
  double derivative_error = 0.0;  // relative, against central differences
};
/// Throws TopologyError when the thresholds below are exceeded.
SelfCheck self_check(const ManufacturedCase& c, int samples = 100, unsigned seed = 1);
inline constexpr double kStrongResidualTolerance = 1e-10;
inline constexpr double kDerivativeTolerance = 1e-8;

struct ErrorColumn {
  std::string name;
  double value = 0.0;
  double rate = 0.0;  // NaN on the first row
};

/// Error columns in table order:
///   elasticity: e_omega (rotation with pressure), e_u
///   biot:       e_omega (rotation with total pressure), e_u, e_p
///   interface:  e_omegaP, e_phiP, e_pP, e_u, e_omegaE, e_pE
std::vector<ErrorColumn> error_columns(ProblemKind kind, const ErrorReport& e, bool mean_term);

struct ConvergenceRow {
  int level = 0;
  int dofs = 0;
  int cells = 0;
  double h = 0.0;
  std::vector<ErrorColumn> errors;
  double total = 0.0;
  double total_rate = 0.0;
  double estimator = 0.0;
  double oscillation = 0.0;
  double effectivity = 0.0;
  double solve_residual = 0.0;
  double seconds = 0.0;
};

/// log(e / e~) / log(h / h~); 0 when both pairs coincide.
double uniform_rate(double e, double e_next, double h, double h_next);
/// -2 log(e / e~) / log(N / N~).
double dof_rate(double e, double e_next, double n, double n_next);

struct ConvergenceOptions {
  ExecPolicy policy = ExecPolicy::Parallel;
  /// Include the (1/mu)||q - mean q||^2 pressure terms in the error columns.
  bool mean_term = true;
  /// Called after every level.
  std::function<void(const ConvergenceRow&, const Mesh&, const StepResult&)> on_level;
};

/// Levels 0..levels-1 on meshes with n = 2^(level+2) (square) or 2^level
/// (L-shape, rates against dofs).
std::vector<ConvergenceRow> uniform_convergence(const ManufacturedCase& c, int k, int levels,
                                                const ConvergenceOptions& opts = {});

/// Rows from an adaptive history; rates use the dof formula.
std::vector<ConvergenceRow> adaptive_rows(ProblemKind kind, const AmrHistory& h, bool mean_term);
/// dof_rate over consecutive records for one column.
std::vector<double> adaptive_rate(const std::vector<double>& errors, const std::vector<int>& dofs);

/// RFC 4180 table; errors with 3 significant digits, rates with 2 decimals.
void write_table_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows);
void write_table_csv(const std::string& path, const std::vector<ConvergenceRow>& rows);
/// Fixed-width table for terminals.
void print_table(std::ostream& out, const std::vector<ConvergenceRow>& rows);

std::string format_error(double v);
std::string format_rate(double v);

}  // namespace rotafem
