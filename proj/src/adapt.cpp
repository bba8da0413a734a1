#include "rotafem/adapt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace rotafem {

const char* to_string(MarkingRule r) { return r == MarkingRule::Bulk ? "bulk" : "complement"; }

MarkingRule parse_marking_rule(const std::string& s) {
  if (s == "bulk") return MarkingRule::Bulk;
  if (s == "complement") return MarkingRule::Complement;
  throw InvalidArgument("unknown marking rule '" + s + "' (expected bulk or complement)");
}

std::vector<int> dorfler_mark(const std::vector<double>& eta2, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw InvalidArgument("dorfler_mark: fraction must lie in (0, 1)");
  double total = 0.0;
  for (double v : eta2) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("dorfler_mark: indicators must be finite and >= 0");
    total += v;
  }
  std::vector<int> order(eta2.size());
  if (total == 0.0) return {};
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return eta2[a] > eta2[b]; });
  // Summing in sorted order keeps the result invariant under scaling.
  double target = 0.0;
  for (int i : order) target += eta2[i];
  target *= fraction;
  double sum = 0.0;
  std::size_t m = 0;
  while (m < order.size() && sum < target) sum += eta2[order[m++]];
  order.resize(m);
  return order;
}

std::vector<int> dorfler_mark(const std::vector<double>& eta2, double zeta, MarkingRule rule) {
  if (!(zeta > 0.0 && zeta < 1.0)) throw InvalidArgument("dorfler_mark: zeta must lie in (0, 1)");
  return dorfler_mark(eta2, rule == MarkingRule::Bulk ? zeta : 1.0 - zeta);
}

StepResult solve_and_estimate(const Mesh& mesh, const ProblemSetup& setup) {
  const auto t0 = std::chrono::steady_clock::now();
  const Discretization disc = make_discretization(mesh, setup.kind, setup.k);
  AssemblyOptions ao;
  ao.policy = setup.policy;
  const LinearSystem sys = assemble(mesh, disc, setup.params, setup.data, ao);
  StepResult r{{}, solve(sys, disc), {}};
  EstimatorOptions eo;
  eo.policy = setup.policy;
  r.report = estimate(mesh, r.solution, setup.params, setup.data, eo);

  StepRecord& rec = r.record;
  rec.dofs = disc.num_dofs();
  for (const FieldBlock& f : disc.fields) rec.field_dofs.push_back({f.name, f.space.dof_count()});
  rec.cells = static_cast<int>(mesh.num_cells());
  rec.h_max = max_cell_diameter(mesh);
  rec.estimator = r.report.estimator;
  rec.oscillation = r.report.global_oscillation;
  rec.solve_residual = r.solution.info.residual;
  if (setup.exact) rec.errors = triple_norm_error(mesh, r.solution, *setup.exact, setup.params);
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

AmrHistory amr_loop(const Mesh& initial, const ProblemSetup& setup, const AmrOptions& opts,
                    const AmrObserver& observer) {
  if (!(opts.zeta > 0.0 && opts.zeta < 1.0)) throw InvalidArgument("amr_loop: zeta must lie in (0, 1)");
  if (opts.max_iterations < 0) throw InvalidArgument("amr_loop: max_iterations must be >= 0");
  if (opts.max_dofs <= 0) throw InvalidArgument("amr_loop: max_dofs must be positive");
  setup.params.validate();

  AmrHistory h;
  h.final_mesh = initial;
  const int solves = std::max(1, opts.max_iterations);
  for (int it = 0; it < solves; ++it) {
    StepResult step;
    try {
      step = solve_and_estimate(h.final_mesh, setup);
    } catch (const std::exception& e) {
      throw AmrError(std::string("iteration ") + std::to_string(it) + ": " + e.what(), h);
    }
    h.records.push_back(step.record);
    if (observer) observer(it, h.final_mesh, step);
    if (it + 1 == solves || step.record.dofs >= opts.max_dofs) break;

    const std::vector<int> marked =
        dorfler_mark(step.report.marking_indicators(h.final_mesh), opts.zeta, opts.rule);
    h.marked_counts.push_back(static_cast<int>(marked.size()));
    if (marked.empty()) break;
    Mesh next = bisect(h.final_mesh, marked, opts.refinement);
    h.final_mesh = opts.smooth ? smooth(next) : std::move(next);
  }
  return h;
}

}  // namespace rotafem
