#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <string_view>

#include "declsolve/auglag.hpp"
#include "declsolve/corpus.hpp"
#include "declsolve/error.hpp"
#include "declsolve/model.hpp"
#include "declsolve/reformulate.hpp"

namespace declsolve::cli {

/// Environment variable naming a JSON config file with default settings.
inline constexpr const char* kConfigEnv = "DECLSOLVE_CONFIG";

enum class InitMode { kZero, kRandom };

struct RunConfig {
  std::string model_path;
  std::map<std::string, std::string> data;  // parameter name -> file
  VariableSizes sizes;                      // extents the data leaves open
  KktTolerances tolerances;
  std::size_t max_outer = 100;
  std::size_t max_inner = 5000;
  std::size_t history = 10;
  std::string out;  // report path; empty writes to the output stream
  int verbosity = 0;
  std::uint64_t seed = 0;
  /// kRandom draws declared variables uniformly from [0, 1) with `seed`.
  InitMode init = InitMode::kZero;
};

/// Applies the keys of a JSON object: tol, feas_tol, comp_tol, max_outer,
/// max_inner, history, seed, init ("zero" | "random"), verbosity. Unknown
/// keys or wrong types throw kConfig.
void apply_config_json(RunConfig& cfg, std::string_view json_text, const std::string& source);
void apply_config_file(RunConfig& cfg, const std::string& path);

/// Loads one file per declared parameter. Throws kBinding for a parameter
/// without a file and for a file bound to an undeclared name.
Env load_bindings(const ProblemSpec& spec, const std::map<std::string, std::string>& files);

/// Solver settings for a compiled problem, including the start point.
AuglagConfig solver_config(const RunConfig& cfg, const CompiledProblem& p);

/// Report as pretty-printed JSON. Fields: status, sense, objective,
/// variables (declared variables only, scalars as numbers, vectors as
/// arrays, matrices as arrays of rows), multipliers {equality, inequality}
/// (one entry per written constraint: line, shape, values), kkt,
/// tolerances, iterations {outer, inner}, rho, seed, wall_time.
std::string report_json(const ProblemSpec& spec, const CompiledProblem& p, const SolverReport& r,
                        std::uint64_t seed);

/// 0 for Optimal, 2 for any other solver outcome.
int exit_code(SolveStatus s);

struct RunOutcome {
  int exit_code = 1;
  std::string report;  // empty when the input was rejected
  SolverReport solver;
};

/// Model file -> parse, validate, rewrite, compile, solve. Expected errors
/// are written to `log` as one diagnostic line and give exit code 1.
RunOutcome run(const RunConfig& cfg, std::ostream& log);

/// Parses `RxC` (or a single `N` for N x 1). Throws kConfig.
std::pair<std::size_t, std::size_t> parse_extent(std::string_view text);

/// One-line diagnostic: `file:line:col: error (kind): message`.
std::string format_error(const Error& e, const std::string& file);

/// Writes every binding of `g` as `<name>.csv`, the planted values as
/// `truth_<name>.csv`, and the model text as `<model>.model` into `dir`.
void write_instance(const corpus::GeneratedInstance& g, std::string_view model_text,
                    const std::string& dir);

}  // namespace declsolve::cli
