// Command-line front end: `solve` runs a model file against data files,
// `gen` writes a synthetic instance for a bundled model.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <optional>

#include "declsolve/cli.hpp"
#include "declsolve/corpus.hpp"

namespace {

using declsolve::Error;
namespace cli = declsolve::cli;
namespace corpus = declsolve::corpus;

struct SolveArgs {
  std::string model;
  std::vector<std::string> data;
  std::vector<std::string> sizes;
  std::string config;
  std::optional<double> tol;
  std::optional<double> feas_tol;
  std::optional<std::size_t> max_outer;
  std::optional<std::size_t> max_inner;
  std::optional<std::size_t> history;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> init;
  std::string out;
  int verbose = 0;
};

int run_solve(const SolveArgs& a) {
  cli::RunConfig cfg;
  try {
    std::string config = a.config;
    if (config.empty()) {
      if (const char* env = std::getenv(cli::kConfigEnv); env != nullptr) config = env;
    }
    if (!config.empty()) cli::apply_config_file(cfg, config);
    cfg.model_path = a.model;
    for (const std::string& binding : a.data) {
      const auto eq = binding.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == binding.size()) {
        throw Error(declsolve::ErrorKind::kConfig, "--data expects NAME=FILE, got '" + binding + "'");
      }
      const std::string name = binding.substr(0, eq);
      if (!cfg.data.emplace(name, binding.substr(eq + 1)).second) {
        throw Error(declsolve::ErrorKind::kBinding, "parameter '" + name + "' bound twice");
      }
    }
    for (const std::string& size : a.sizes) {
      const auto eq = size.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw Error(declsolve::ErrorKind::kConfig, "--size expects NAME=RxC, got '" + size + "'");
      }
      cfg.sizes[size.substr(0, eq)] = cli::parse_extent(std::string_view(size).substr(eq + 1));
    }
    if (a.tol) cfg.tolerances.stationarity = cfg.tolerances.complementarity = *a.tol;
    if (a.feas_tol) cfg.tolerances.feasibility = *a.feas_tol;
    if (a.max_outer) cfg.max_outer = *a.max_outer;
    if (a.max_inner) cfg.max_inner = *a.max_inner;
    if (a.history) cfg.history = *a.history;
    if (a.seed) cfg.seed = *a.seed;
    if (a.init) cfg.init = *a.init == "random" ? cli::InitMode::kRandom : cli::InitMode::kZero;
    cfg.out = a.out;
    cfg.verbosity = std::max(cfg.verbosity, a.verbose);
  } catch (const Error& e) {
    std::cerr << cli::format_error(e, "config") << "\n";
    return 1;
  }
  const cli::RunOutcome outcome = cli::run(cfg, std::cerr);
  if (cfg.out.empty()) std::cout << outcome.report;
  return outcome.exit_code;
}

int run_gen(const std::string& name, std::uint64_t seed, const std::string& dir) {
  try {
    const auto model = corpus::find_model(name);
    if (!model) throw Error(declsolve::ErrorKind::kConfig, "unknown model '" + name + "'");
    const corpus::GeneratedInstance g = corpus::default_instance(name, seed);
    cli::write_instance(g, model->text, dir);
    std::cout << "solve --model " << dir << "/" << name << ".model";
    for (const auto& [param, value] : g.data.values()) std::cout << " --data " << param << "=" << dir << "/" << param << ".csv";
    for (const auto& [var, extent] : g.sizes) std::cout << " --size " << var << "=" << extent.first << "x" << extent.second;
    std::cout << "\n";
    return 0;
  } catch (const Error& e) {
    std::cerr << cli::format_error(e, name) << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solver generator for constrained optimization models"};
  app.require_subcommand(1);

  SolveArgs s;
  CLI::App* solve = app.add_subcommand("solve", "Solve a model file against data files");
  solve->add_option("--model", s.model, "Model file")->required();
  solve->add_option("--data", s.data, "Parameter binding NAME=FILE (CSV or Matrix Market)");
  solve->add_option("--size", s.sizes, "Variable extent NAME=RxC when the data leaves it open");
  solve->add_option("--config", s.config, std::string("JSON config file (default: $") + cli::kConfigEnv + ")");
  solve->add_option("--tol", s.tol, "Stationarity and complementarity tolerance")->check(CLI::PositiveNumber);
  solve->add_option("--feas-tol", s.feas_tol, "Feasibility tolerance")->check(CLI::PositiveNumber);
  solve->add_option("--max-outer", s.max_outer, "Outer iteration limit")->check(CLI::PositiveNumber);
  solve->add_option("--max-inner", s.max_inner, "Inner iteration limit")->check(CLI::PositiveNumber);
  solve->add_option("--history", s.history, "L-BFGS history size")->check(CLI::PositiveNumber);
  solve->add_option("--seed", s.seed, "Seed for random start points");
  solve->add_option("--init", s.init, "Start point: zero or random")->check(CLI::IsMember({"zero", "random"}));
  solve->add_option("--out", s.out, "Report file (default: stdout)");
  solve->add_flag("-v,--verbose", s.verbose, "Log outer iterations to stderr");

  std::string gen_name;
  std::uint64_t gen_seed = 1;
  std::string gen_dir = ".";
  CLI::App* gen = app.add_subcommand("gen", "Write a synthetic instance for a bundled model");
  gen->add_option("name", gen_name, "Model name")->required()->check(CLI::IsMember(corpus::generator_names()));
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--out", gen_dir, "Output directory");

  CLI11_PARSE(app, argc, argv);
  if (solve->parsed()) return run_solve(s);
  return run_gen(gen_name, gen_seed, gen_dir);
}
