#pragma once

#include "rotafem/estimate.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rotafem {

/// How the Doerfler parameter is read.
///   Bulk:       mark until the marked share of sum Phi_K^2 reaches zeta.
///   Complement: mark until it reaches 1 - zeta (zeta is the unmarked share).
enum class MarkingRule { Bulk, Complement };
const char* to_string(MarkingRule r);
MarkingRule parse_marking_rule(const std::string& s);

/// Shortest prefix of the cells sorted by indicator^2 (descending, ties by
/// ascending index) whose sum reaches fraction * total. Returned indices are
/// in that order. All-zero indicators give an empty set.
std::vector<int> dorfler_mark(const std::vector<double>& indicator_squares, double fraction);
std::vector<int> dorfler_mark(const std::vector<double>& indicator_squares, double zeta, MarkingRule rule);

/// Everything one solve on one mesh needs.
struct ProblemSetup {
  ProblemKind kind = ProblemKind::Elasticity;
  int k = 0;
  ProblemParams params;
  ProblemData data;
  std::optional<ExactSolution> exact;
  ExecPolicy policy = ExecPolicy::Parallel;
};

struct FieldDofs {
  std::string name;
  int dofs = 0;
};

/// One solve-estimate(-error) pass.
struct StepRecord {
  int dofs = 0;
  std::vector<FieldDofs> field_dofs;
  int cells = 0;
  double h_max = 0.0;
  double estimator = 0.0;
  double oscillation = 0.0;
  std::optional<ErrorReport> errors;
  double solve_residual = 0.0;
  double seconds = 0.0;
};

struct StepResult {
  StepRecord record;
  FieldSolution solution;
  EstimatorReport report;
};

StepResult solve_and_estimate(const Mesh& mesh, const ProblemSetup& setup);

struct AmrOptions {
  double zeta = 0.001;
  MarkingRule rule = MarkingRule::Complement;
  /// Number of solves (history records); 0 still keeps the initial solve.
  int max_iterations = 7;
  /// No further refinement once a solve reaches this many dofs.
  long max_dofs = 100000;
  /// Halving refines every marked cell into four children.
  BisectionMode refinement = BisectionMode::Halving;
  bool smooth = true;
};

struct AmrHistory {
  std::vector<StepRecord> records;
  Mesh final_mesh;
  std::vector<int> marked_counts;  // cells marked after each record but the last
};

class AmrError : public std::runtime_error {
 public:
  AmrError(const std::string& what, AmrHistory partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const AmrHistory& partial() const { return partial_; }

 private:
  AmrHistory partial_;
};

/// Observer called after each record, with the state used to produce it.
using AmrObserver = std::function<void(int iteration, const Mesh&, const StepResult&)>;

/// solve, estimate, mark, bisect, smooth; repeated until a stop criterion.
AmrHistory amr_loop(const Mesh& initial, const ProblemSetup& setup, const AmrOptions& opts,
                    const AmrObserver& observer = {});

}  // namespace rotafem
