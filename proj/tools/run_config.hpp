#pragma once

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rotafem::cli {

inline constexpr const char* kVersion = ROTAFEM_VERSION;

enum ExitCode { kOk = 0, kInvalidConfig = 2, kSolverFailure = 3 };

/// Everything one invocation needs. Unset optionals take the case defaults:
/// the square uses E = 1, nu = 0.25 and 1 for everything else; the L-shape
/// uses its own material split.
struct RunConfig {
  std::string problem = "elasticity";  // elasticity | biot | interface
  std::string mode = "uniform";        // uniform | adaptive | single
  int k = 0;
  int levels = 6;
  std::optional<int> n;  // single/adaptive start mesh; 4 (square) or 1 (L-shape)
  int max_iterations = 7;
  long max_dofs = 100000;
  double zeta = 0.001;
  std::string rule = "complement";   // bulk | complement
  std::string refinement = "halving";  // halving | newest
  bool smooth = true;

  std::optional<double> E, nu;  // both subdomains
  std::optional<double> E_elastic, nu_elastic, E_poro, nu_poro;
  std::optional<double> alpha, c0, kappa, xi;

  std::string geometry = "square";  // square | lshape
  std::optional<double> a;          // square pressure parameter; 1/2 for interface, else 1
  std::string variant = "stream-function";
  bool stabilization = true;

  int threads = 0;  // 0: hardware parallelism
  std::string out = ".";
  std::vector<std::string> emit{"csv", "json"};  // csv, json, vtk, matrixmarket
};

/// Keys mirror the field names; "case" holds geometry. Unknown keys throw.
void from_json(const nlohmann::json& j, RunConfig& c);
nlohmann::ordered_json to_json(const RunConfig& c);
RunConfig load_config(const std::string& path);

/// Throws InvalidArgument with a one-line reason.
void validate(const RunConfig& c);

/// Runs the campaign, writes the outputs and prints the table to out.
int run(const RunConfig& c, std::ostream& out, std::ostream& err);

/// Command-line entry: flags override the --config file.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rotafem::cli
