#pragma once

#include "rotafem/forms.hpp"

#include <string_view>
#include <vector>

namespace rotafem {

/// Singular pivot (dof >= 0) or failed residual check (dof == -1).
class SolveError : public std::runtime_error {
 public:
  SolveError(const std::string& what, int dof, double residual)
      : std::runtime_error(what), dof_(dof), residual_(residual) {}
  int dof() const { return dof_; }
  double residual() const { return residual_; }

 private:
  int dof_;
  double residual_;
};

struct SolveInfo {
  double residual = 0.0;  // ||Ax - b||_inf / (||A||_inf ||x||_inf + ||b||_inf)
  double min_pivot_ratio = 0.0;
  int condensed = 0;  // dofs eliminated cell-wise before factorization
};

struct SolverOptions {
  /// Eliminate fields whose diagonal block is block-diagonal with small
  /// blocks (cell-local rotations) before the sparse factorization.
  bool condense = true;
};

struct FieldSolution {
  ProblemKind kind = ProblemKind::Elasticity;
  int k = 0;
  std::vector<FieldBlock> fields;
  std::vector<Eigen::VectorXd> values;
  SolveInfo info;

  bool has(std::string_view name) const;
  const Eigen::VectorXd& operator[](std::string_view name) const;
  const Space& space(std::string_view name) const;
  int num_dofs() const;
};

inline constexpr double kPivotTolerance = 1e-13;
inline constexpr double kResidualTolerance = 1e-10;

/// Backward residual ||Ax - b||_inf / (||A||_inf ||x||_inf + ||b||_inf).
double backward_residual(const SparseMatrix& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b);

/// Sparse LU (UMFPACK) with the pivot and residual checks enforced.
Eigen::VectorXd solve_vector(const LinearSystem& system, SolveInfo* info = nullptr, const SolverOptions& opts = {});

/// Eigen::SparseLU reference path with the same checks.
Eigen::VectorXd solve_vector_reference(const LinearSystem& system, SolveInfo* info = nullptr);

/// Splits x into the fields of disc; lengths must match.
FieldSolution split(const Discretization& disc, const Eigen::VectorXd& x);

FieldSolution solve(const LinearSystem& system, const Discretization& disc, const SolverOptions& opts = {});

}  // namespace rotafem
