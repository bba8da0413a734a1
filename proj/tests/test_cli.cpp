#include <doctest.h>

#include "run_config.hpp"
#include "rotafem/types.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

using namespace rotafem;
using namespace rotafem::cli;
namespace fs = std::filesystem;

namespace {

struct Invocation {
  int code = -1;
  std::string out, err;
};

Invocation invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "rotafem");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  Invocation r;
  r.code = main_entry(static_cast<int>(argv.size()), argv.data(), o, e);
  r.out = o.str();
  r.err = e.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rotafem_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json summary(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / "summary.json")); }

}  // namespace

TEST_CASE("defaults are the square with E = 1, nu = 0.25") {
  const RunConfig c;
  CHECK(c.problem == "elasticity");
  CHECK(c.geometry == "square");
  CHECK(c.stabilization);
  CHECK(c.emit == std::vector<std::string>{"csv", "json"});
  CHECK_NOTHROW(validate(c));
}

TEST_CASE("json round trip") {
  RunConfig c;
  c.problem = "biot";
  c.mode = "adaptive";
  c.k = 1;
  c.E = 1e5;
  c.nu_poro = 0.45;
  c.emit = {"vtk"};
  RunConfig d;
  from_json(nlohmann::json::parse(to_json(c).dump()), d);
  CHECK(to_json(d) == to_json(c));
  CHECK(*d.E == 1e5);
  CHECK_FALSE(d.nu.has_value());
}

TEST_CASE("config validation") {
  auto rejects = [](auto edit) {
    RunConfig c;
    edit(c);
    CHECK_THROWS_AS(validate(c), InvalidArgument);
  };
  rejects([](RunConfig& c) { c.problem = "stokes"; });
  rejects([](RunConfig& c) { c.mode = "batch"; });
  rejects([](RunConfig& c) { c.k = 2; });
  rejects([](RunConfig& c) { c.levels = 0; });
  rejects([](RunConfig& c) { c.n = 0; });
  rejects([](RunConfig& c) { c.mode = "adaptive", c.zeta = 0.0; });
  rejects([](RunConfig& c) { c.rule = "greedy"; });
  rejects([](RunConfig& c) { c.geometry = "disk"; });
  rejects([](RunConfig& c) { c.geometry = "lshape", c.a = 0.5; });
  rejects([](RunConfig& c) { c.variant = "C"; });
  rejects([](RunConfig& c) { c.nu = 0.5; });
  rejects([](RunConfig& c) { c.alpha = 0.0; });
  rejects([](RunConfig& c) { c.emit = {"png"}; });
  rejects([](RunConfig& c) { c.threads = -1; });
  RunConfig ok;
  ok.mode = "uniform";
  ok.zeta = 0.0;  // only read by the adaptive loop
  CHECK_NOTHROW(validate(ok));
}

TEST_CASE("unknown flags and bad values exit with 2 and one line") {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"elasticity", "--bogus"}, {"elasticity", "--k", "7"}, {"biot", "--uniform", "--single"},
           {"plate"}, {"interface", "--adaptive", "--zeta", "1.5"}, {"--config", "/nonexistent/x.json"}}) {
    const Invocation r = invoke(args);
    CAPTURE(args.back());
    CHECK(r.code == kInvalidConfig);
    CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
    CHECK(r.out.empty());
  }
}

TEST_CASE("single solve writes the table and summary") {
  const fs::path dir = scratch("single");
  const Invocation r = invoke({"elasticity", "--single", "--n", "4", "--k", "0", "--out", dir.string()});
  REQUIRE(r.code == kOk);
  const auto s = summary(dir);
  CHECK(s["records"].size() == 1);
  CHECK(s["records"][0]["dofs"] == 114);
  CHECK(s["variant"] == "stream-function");
  CHECK(s["version"] == kVersion);
  CHECK(s["config"]["mode"] == "single");
  CHECK(s["status"] == "ok");
  CHECK(s["parameters"]["elastic"]["nu"].get<double>() == doctest::Approx(0.25));
  const std::string csv = slurp(dir / "table.csv");
  CHECK(csv.rfind("dofs,h,e_omega,r_omega,e_u,r_u,e,eff\r\n114,0.3536,", 0) == 0);
  CHECK(r.out.find("114") != std::string::npos);
}

TEST_CASE("flags override the config file") {
  const fs::path dir = scratch("override");
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "run.json");
    f << R"({"problem": "biot", "mode": "single", "E": 1e5, "nu": 0.3, "emit": ["json"]})";
  }
  const Invocation r = invoke({"--config", (dir / "run.json").string(), "--nu", "0.499", "--out", (dir / "o").string()});
  REQUIRE(r.code == kOk);
  const auto s = summary(dir / "o");
  CHECK(s["config"]["problem"] == "biot");
  CHECK(s["config"]["E"].get<double>() == 1e5);
  CHECK(s["config"]["nu"].get<double>() == 0.499);
  CHECK(s["records"][0]["dofs"] == 139);
  CHECK_FALSE(fs::exists(dir / "o" / "table.csv"));
}

TEST_CASE("unknown config keys are rejected") {
  const fs::path dir = scratch("badkey");
  fs::create_directories(dir);
  std::ofstream(dir / "run.json") << R"({"problem": "biot", "permeability": 1})";
  const Invocation r = invoke({"--config", (dir / "run.json").string()});
  CHECK(r.code == kInvalidConfig);
  CHECK(r.err.find("permeability") != std::string::npos);
}

TEST_CASE("identical configs give byte-identical outputs") {
  const fs::path a = scratch("repro_a"), b = scratch("repro_b");
  fs::create_directories(a);
  fs::create_directories(b);
  const auto cwd = fs::current_path();
  for (const fs::path& d : {a, b}) {
    fs::current_path(d);
    CHECK(invoke({"interface", "--uniform", "--levels", "2", "--k", "1", "--threads", "2"}).code == kOk);
  }
  fs::current_path(cwd);
  CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
  CHECK(slurp(a / "table.csv") == slurp(b / "table.csv"));
}

TEST_CASE("vtk and matrix market files per level") {
  const fs::path dir = scratch("files");
  const Invocation r = invoke({"elasticity", "--uniform", "--levels", "2", "--emit", "vtk,matrixmarket", "--out",
                               dir.string()});
  REQUIRE(r.code == kOk);
  for (const char* f : {"mesh_0000.vtk", "mesh_0001.vtk", "matrix_0000.mtx", "matrix_0001.mtx"})
    CHECK(fs::exists(dir / f));
  CHECK_FALSE(fs::exists(dir / "summary.json"));
  CHECK(slurp(dir / "mesh_0000.vtk").rfind("# vtk DataFile Version", 0) == 0);
  CHECK(slurp(dir / "matrix_0001.mtx").rfind("%%MatrixMarket matrix coordinate real general", 0) == 0);
}

TEST_CASE("adaptive run records marked counts") {
  const fs::path dir = scratch("adaptive");
  const Invocation r = invoke({"biot", "--adaptive", "--zeta", "0.5", "--rule", "bulk", "--max-iters", "3", "--out",
                               dir.string()});
  REQUIRE(r.code == kOk);
  const auto s = summary(dir);
  REQUIRE(s["records"].size() == 3);
  CHECK(s["records"][0].contains("marked"));
  CHECK_FALSE(s["records"][2].contains("marked"));
  CHECK(s["records"][0]["errors"]["e_p"]["rate"].is_null());
  CHECK(s["records"][2]["dofs"] > s["records"][0]["dofs"]);
}

TEST_CASE("solver failure exits with 3 and keeps the summary") {
  // c0 = 0 with only Dirichlet displacement data leaves a pressure mode free.
  const fs::path dir = scratch("fail");
  const Invocation r = invoke({"biot", "--single", "--case", "lshape", "--n", "2", "--out", dir.string()});
  CHECK(r.code == kSolverFailure);
  const auto s = summary(dir);
  CHECK(s["status"] == "solver_failure");
  CHECK(s["records"].empty());
}
