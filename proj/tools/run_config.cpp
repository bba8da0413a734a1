#include "run_config.hpp"

#include "rotafem/linsolve.hpp"
#include "rotafem/verify.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

namespace rotafem::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const std::set<std::string> kKeys{"problem", "mode",       "k",         "levels",     "n",        "max_iterations",
                                  "max_dofs", "zeta",      "rule",      "refinement", "smooth",   "E",
                                  "nu",       "E_elastic", "nu_elastic", "E_poro",    "nu_poro",  "alpha",
                                  "c0",       "kappa",     "xi",        "case",       "a",        "variant",
                                  "stabilization", "threads", "out",    "emit"};

template <class T>
void read(const json& j, const char* key, T& v) {
  if (j.contains(key)) j.at(key).get_to(v);
}

template <class T>
void read(const json& j, const char* key, std::optional<T>& v) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    v.reset();
  } else {
    v = j.at(key).get<T>();
  }
}

template <class T>
ordered_json opt(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

bool emits(const RunConfig& c, const std::string& what) {
  return std::find(c.emit.begin(), c.emit.end(), what) != c.emit.end();
}

ProblemKind problem_kind(const std::string& s) {
  if (s == "elasticity") return ProblemKind::Elasticity;
  if (s == "biot") return ProblemKind::Biot;
  if (s == "interface") return ProblemKind::Interface;
  throw InvalidArgument("unknown problem '" + s + "' (expected elasticity, biot or interface)");
}

BisectionMode bisection_mode(const std::string& s) {
  if (s == "halving") return BisectionMode::Halving;
  if (s == "newest") return BisectionMode::Newest;
  throw InvalidArgument("unknown refinement '" + s + "' (expected halving or newest)");
}

struct Young {
  double E, nu;
};

ProblemParams resolve_params(const RunConfig& c) {
  const bool square = c.geometry == "square";
  ProblemParams p = square ? square_params(1.0, 0.25) : lshape_params();
  Young el = square ? Young{1.0, 0.25} : Young{10.0, 0.25};
  Young po = square ? Young{1.0, 0.25} : Young{1.0, 0.45};
  if (c.E) el.E = po.E = *c.E;
  if (c.nu) el.nu = po.nu = *c.nu;
  if (c.E_elastic) el.E = *c.E_elastic;
  if (c.nu_elastic) el.nu = *c.nu_elastic;
  if (c.E_poro) po.E = *c.E_poro;
  if (c.nu_poro) po.nu = *c.nu_poro;
  p.elastic = Material::from_young(el.E, el.nu);
  p.poro = Material::from_young(po.E, po.nu);
  if (c.alpha) p.alpha = *c.alpha;
  if (c.c0) p.c0 = *c.c0;
  if (c.kappa) p.kappa = *c.kappa;
  if (c.xi) p.xi = *c.xi;
  p.stabilization = c.stabilization;
  p.validate();
  return p;
}

ManufacturedCase make_case(const RunConfig& c) {
  const ProblemKind kind = problem_kind(c.problem);
  const ProblemParams p = resolve_params(c);
  ManufacturedCase mc;
  if (c.geometry == "square") {
    const double a = c.a.value_or(kind == ProblemKind::Interface ? 0.5 : 1.0);
    mc = case_square(kind, p, a, parse_variant(c.variant));
  } else {
    mc = case_lshape(p, kind);
  }
  if (kind == ProblemKind::Interface && mc.partition == Partition::None)
    throw InvalidArgument("the interface problem needs a partitioned case");
  return mc;
}

ordered_json material_json(const Material& m) {
  const double E = m.mu * (3 * m.lambda + 2 * m.mu) / (m.lambda + m.mu);
  const double nu = m.lambda / (2 * (m.lambda + m.mu));
  return {{"E", E}, {"nu", nu}, {"mu", m.mu}, {"lambda", m.lambda}};
}

ordered_json record_json(const ConvergenceRow& row, const StepRecord& rec, std::optional<int> marked) {
  ordered_json r;
  r["level"] = row.level;
  r["dofs"] = row.dofs;
  ordered_json fd = ordered_json::object();
  for (const FieldDofs& f : rec.field_dofs) fd[f.name] = f.dofs;
  r["field_dofs"] = fd;
  r["cells"] = row.cells;
  r["h"] = row.h;
  ordered_json errs = ordered_json::object();
  for (const ErrorColumn& e : row.errors)
    errs[e.name] = {{"value", e.value}, {"rate", std::isnan(e.rate) ? ordered_json(nullptr) : ordered_json(e.rate)}};
  r["errors"] = errs;
  r["total"] = row.total;
  r["total_rate"] = std::isnan(row.total_rate) ? ordered_json(nullptr) : ordered_json(row.total_rate);
  r["estimator"] = row.estimator;
  r["oscillation"] = row.oscillation;
  r["effectivity"] = row.effectivity;
  r["solve_residual"] = row.solve_residual;
  if (marked) r["marked"] = *marked;
  return r;
}

std::string numbered(const RunConfig& c, const char* stem, int i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04d.%s", stem, i, ext);
  return (fs::path(c.out) / buf).string();
}

void write_level_files(const RunConfig& c, const ManufacturedCase& mc, const ProblemSetup& setup, int index,
                       const Mesh& mesh, const StepResult& step) {
  if (emits(c, "vtk")) write_vtk(numbered(c, "mesh", index, "vtk"), mesh, estimator_cell_data(step.report));
  if (emits(c, "matrixmarket")) {
    const Discretization disc = make_discretization(mesh, mc.kind, setup.k);
    AssemblyOptions ao;
    ao.policy = setup.policy;
    write_matrix_market(numbered(c, "matrix", index, "mtx"), assemble(mesh, disc, setup.params, setup.data, ao).A);
  }
}

}  // namespace

void from_json(const json& j, RunConfig& c) {
  if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!kKeys.count(key)) throw InvalidArgument("unknown config key '" + key + "'");
  try {
    read(j, "problem", c.problem);
    read(j, "mode", c.mode);
    read(j, "k", c.k);
    read(j, "levels", c.levels);
    read(j, "n", c.n);
    read(j, "max_iterations", c.max_iterations);
    read(j, "max_dofs", c.max_dofs);
    read(j, "zeta", c.zeta);
    read(j, "rule", c.rule);
    read(j, "refinement", c.refinement);
    read(j, "smooth", c.smooth);
    read(j, "E", c.E);
    read(j, "nu", c.nu);
    read(j, "E_elastic", c.E_elastic);
    read(j, "nu_elastic", c.nu_elastic);
    read(j, "E_poro", c.E_poro);
    read(j, "nu_poro", c.nu_poro);
    read(j, "alpha", c.alpha);
    read(j, "c0", c.c0);
    read(j, "kappa", c.kappa);
    read(j, "xi", c.xi);
    read(j, "case", c.geometry);
    read(j, "a", c.a);
    read(j, "variant", c.variant);
    read(j, "stabilization", c.stabilization);
    read(j, "threads", c.threads);
    read(j, "out", c.out);
    read(j, "emit", c.emit);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
}

ordered_json to_json(const RunConfig& c) {
  return {{"problem", c.problem},
          {"mode", c.mode},
          {"k", c.k},
          {"levels", c.levels},
          {"n", opt(c.n)},
          {"max_iterations", c.max_iterations},
          {"max_dofs", c.max_dofs},
          {"zeta", c.zeta},
          {"rule", c.rule},
          {"refinement", c.refinement},
          {"smooth", c.smooth},
          {"E", opt(c.E)},
          {"nu", opt(c.nu)},
          {"E_elastic", opt(c.E_elastic)},
          {"nu_elastic", opt(c.nu_elastic)},
          {"E_poro", opt(c.E_poro)},
          {"nu_poro", opt(c.nu_poro)},
          {"alpha", opt(c.alpha)},
          {"c0", opt(c.c0)},
          {"kappa", opt(c.kappa)},
          {"xi", opt(c.xi)},
          {"case", c.geometry},
          {"a", opt(c.a)},
          {"variant", c.variant},
          {"stabilization", c.stabilization},
          {"threads", c.threads},
          {"out", c.out},
          {"emit", c.emit}};
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidArgument("config " + path + ": " + e.what());
  }
  RunConfig c;
  from_json(j, c);
  return c;
}

void validate(const RunConfig& c) {
  const ProblemKind kind = problem_kind(c.problem);
  if (c.mode != "uniform" && c.mode != "adaptive" && c.mode != "single")
    throw InvalidArgument("unknown mode '" + c.mode + "' (expected uniform, adaptive or single)");
  if (c.k != 0 && c.k != 1) throw InvalidArgument("k must be 0 or 1");
  if (c.levels < 1 || c.levels > 12) throw InvalidArgument("levels must lie in [1, 12]");
  if (c.n && (*c.n < 1 || *c.n > 1024)) throw InvalidArgument("n must lie in [1, 1024]");
  if (c.max_iterations < 0) throw InvalidArgument("max_iterations must be >= 0");
  if (c.max_dofs <= 0) throw InvalidArgument("max_dofs must be positive");
  if (c.mode == "adaptive" && !(c.zeta > 0.0 && c.zeta < 1.0))
    throw InvalidArgument("adaptive mode needs zeta in (0, 1)");
  parse_marking_rule(c.rule);
  bisection_mode(c.refinement);
  if (c.geometry != "square" && c.geometry != "lshape")
    throw InvalidArgument("unknown case '" + c.geometry + "' (expected square or lshape)");
  if (c.a && (!std::isfinite(*c.a) || *c.a == 0.0)) throw InvalidArgument("a must be finite and nonzero");
  if (c.a && c.geometry != "square") throw InvalidArgument("a applies to the square case only");
  parse_variant(c.variant);
  if (c.threads < 0) throw InvalidArgument("threads must be >= 0");
  for (const std::string& e : c.emit)
    if (e != "csv" && e != "json" && e != "vtk" && e != "matrixmarket")
      throw InvalidArgument("unknown emit target '" + e + "' (expected csv, json, vtk or matrixmarket)");
  if (c.out.empty()) throw InvalidArgument("output directory must not be empty");
  (void)kind;
  resolve_params(c);
}

int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  ManufacturedCase mc;
  try {
    validate(c);
    mc = make_case(c);
    fs::create_directories(c.out);
  } catch (const InvalidArgument& e) {
    err << "rotafem: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const fs::filesystem_error& e) {
    err << "rotafem: cannot create " << c.out << ": " << e.code().message() << '\n';
    return kInvalidConfig;
  }

  if (c.threads > 0) omp_set_num_threads(c.threads);
  const ExecPolicy policy = c.threads == 1 ? ExecPolicy::Serial : ExecPolicy::Parallel;
  const ProblemSetup setup = mc.setup(c.k, policy);
  const int n = c.n.value_or(mc.geometry == Geometry::Square ? 4 : 1);

  std::vector<ConvergenceRow> rows;
  std::vector<StepRecord> records;
  std::vector<int> marked;
  std::string failure;
  try {
    if (c.mode == "uniform") {
      ConvergenceOptions o;
      o.policy = policy;
      o.on_level = [&](const ConvergenceRow& row, const Mesh& m, const StepResult& s) {
        rows.push_back(row);
        records.push_back(s.record);
        write_level_files(c, mc, setup, row.level, m, s);
      };
      uniform_convergence(mc, c.k, c.levels, o);
    } else {
      AmrOptions o;
      o.zeta = c.zeta;
      o.rule = parse_marking_rule(c.rule);
      o.refinement = bisection_mode(c.refinement);
      o.smooth = c.smooth;
      o.max_dofs = c.max_dofs;
      o.max_iterations = c.mode == "single" ? 0 : c.max_iterations;
      AmrHistory h;
      try {
        h = amr_loop(mc.mesh(n), setup, o,
                     [&](int it, const Mesh& m, const StepResult& s) { write_level_files(c, mc, setup, it, m, s); });
      } catch (const AmrError& e) {
        h = e.partial();
        failure = e.what();
      }
      records = h.records;
      marked = h.marked_counts;
      rows = adaptive_rows(mc.kind, h, true);
    }
  } catch (const InvalidArgument& e) {
    err << "rotafem: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const std::exception& e) {
    failure = e.what();
  }

  if (!rows.empty()) print_table(out, rows);

  try {
    if (emits(c, "csv")) write_table_csv((fs::path(c.out) / "table.csv").string(), rows);
    if (emits(c, "json")) {
      const ProblemParams& p = setup.params;
      ordered_json s;
      s["tool"] = "rotafem";
      s["version"] = kVersion;
      s["config"] = to_json(c);
      s["case"] = mc.name;
      s["variant"] = mc.geometry == Geometry::Square ? to_string(mc.variant) : "exponential";
      s["parameters"] = {{"elastic", material_json(p.elastic)}, {"poro", material_json(p.poro)},
                         {"alpha", p.alpha},  {"c0", p.c0},
                         {"kappa", p.kappa},  {"xi", p.xi},
                         {"stabilization", p.stabilization}};
      s["status"] = failure.empty() ? "ok" : "solver_failure";
      if (!failure.empty()) s["message"] = failure;
      ordered_json recs = ordered_json::array();
      for (std::size_t i = 0; i < rows.size(); ++i) {
        std::optional<int> m;
        if (i < marked.size()) m = marked[i];
        recs.push_back(record_json(rows[i], records[i], m));
      }
      s["records"] = recs;
      std::ofstream f(fs::path(c.out) / "summary.json", std::ios::binary);
      if (!f) throw InvalidArgument("cannot write summary.json in " + c.out);
      f << s.dump(2) << '\n';
    }
  } catch (const std::exception& e) {
    err << "rotafem: " << e.what() << '\n';
    return kSolverFailure;
  }

  if (!failure.empty()) {
    err << "rotafem: solver failure: " << failure << '\n';
    return kSolverFailure;
  }
  return kOk;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig c;
  // The file is read first so that explicit flags land on top of it.
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    std::string path;
    if (a == "--config" && i + 1 < argc) path = argv[i + 1];
    if (a.rfind("--config=", 0) == 0) path = a.substr(9);
    if (path.empty()) continue;
    try {
      c = load_config(path);
    } catch (const InvalidArgument& e) {
      err << "rotafem: " << e.what() << '\n';
      return kInvalidConfig;
    }
  }

  CLI::App app{"Rotation-based finite elements for elasticity, Biot and interface problems", "rotafem"};
  app.set_version_flag("--version", std::string(kVersion));
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file; flags override its values");
  app.add_option("problem", c.problem, "elasticity | biot | interface")
      ->check(CLI::IsMember({"elasticity", "biot", "interface"}));

  bool uniform = false, adaptive = false, single = false;
  auto* fu = app.add_flag("--uniform", uniform, "uniform refinement campaign");
  auto* fa = app.add_flag("--adaptive", adaptive, "adaptive refinement loop");
  auto* fs1 = app.add_flag("--single", single, "one solve on one mesh");
  fu->excludes(fa)->excludes(fs1);
  fa->excludes(fs1);

  app.add_option("--k", c.k, "polynomial degree (0 or 1)");
  app.add_option("--levels", c.levels, "uniform levels");
  app.add_option("--n", c.n, "squares per unit length of the starting mesh");
  app.add_option("--max-iters", c.max_iterations, "adaptive solves");
  app.add_option("--max-dofs", c.max_dofs, "stop refining past this many dofs");
  app.add_option("--zeta", c.zeta, "Doerfler parameter");
  app.add_option("--rule", c.rule, "marking rule: complement | bulk");
  app.add_option("--refinement", c.refinement, "halving | newest");
  app.add_option("--smooth", c.smooth, "smooth after refinement (on/off)");
  app.add_option("--E", c.E, "Young modulus, both subdomains");
  app.add_option("--nu", c.nu, "Poisson ratio, both subdomains");
  app.add_option("--E-elastic", c.E_elastic);
  app.add_option("--nu-elastic", c.nu_elastic);
  app.add_option("--E-poro", c.E_poro);
  app.add_option("--nu-poro", c.nu_poro);
  app.add_option("--alpha", c.alpha, "Biot-Willis coefficient");
  app.add_option("--c0", c.c0, "storativity");
  app.add_option("--kappa", c.kappa, "permeability");
  app.add_option("--xi", c.xi, "fluid viscosity");
  app.add_option("--case", c.geometry, "square | lshape");
  app.add_option("--a", c.a, "square pressure parameter");
  app.add_option("--variant", c.variant, "stream-function | printed");
  app.add_option("--stabilization", c.stabilization, "pressure jump stabilization (on/off)");
  app.add_option("--threads", c.threads, "worker cap; 0 uses every core");
  app.add_option("--out", c.out, "output directory");
  app.add_option("--emit", c.emit, "csv,json,vtk,matrixmarket")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    out << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "rotafem: " << e.what() << '\n';
    return kInvalidConfig;
  }
  if (uniform) c.mode = "uniform";
  if (adaptive) c.mode = "adaptive";
  if (single) c.mode = "single";
  return run(c, out, err);
}

}  // namespace rotafem::cli
