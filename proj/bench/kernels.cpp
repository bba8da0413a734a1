#include "rotafem/linsolve.hpp"
#include "rotafem/verify.hpp"

#include <benchmark/benchmark.h>

#include <map>
#include <memory>

using namespace rotafem;

namespace {

struct Problem {
  ManufacturedCase c;
  Mesh mesh;
  Discretization disc;
  FieldSolution sol;
};

// One solved Biot problem per mesh size, shared by every benchmark.
const Problem& biot(int n) {
  static std::map<int, std::unique_ptr<Problem>> cache;
  auto& p = cache[n];
  if (!p) {
    p = std::make_unique<Problem>();
    p->c = case_square(ProblemKind::Biot, square_params(1.0, 0.25), 1.0, Variant::StreamFunction);
    p->mesh = p->c.mesh(n);
    p->disc = make_discretization(p->mesh, ProblemKind::Biot, 1);
    p->sol = solve(assemble(p->mesh, p->disc, p->c.params, p->c.data), p->disc);
  }
  return *p;
}

void assembly(benchmark::State& state, ExecPolicy policy) {
  const Problem& p = biot(static_cast<int>(state.range(0)));
  AssemblyOptions o;
  o.policy = policy;
  for (auto _ : state) benchmark::DoNotOptimize(assemble(p.mesh, p.disc, p.c.params, p.c.data, o));
  state.counters["dofs"] = p.disc.num_dofs();
}

void estimator(benchmark::State& state, ExecPolicy policy) {
  const Problem& p = biot(static_cast<int>(state.range(0)));
  EstimatorOptions o;
  o.policy = policy;
  for (auto _ : state) benchmark::DoNotOptimize(estimate(p.mesh, p.sol, p.c.params, p.c.data, o));
  state.counters["cells"] = static_cast<double>(p.mesh.num_cells());
}

}  // namespace

BENCHMARK_CAPTURE(assembly, serial, ExecPolicy::Serial)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(assembly, openmp, ExecPolicy::Parallel)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(estimator, serial, ExecPolicy::Serial)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(estimator, openmp, ExecPolicy::Parallel)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
