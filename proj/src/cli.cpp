#include "declsolve/cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "declsolve/io.hpp"

namespace declsolve::cli {
namespace {

using nlohmann::json;

json dense_json(const Dense& d, DeclKind kind) {
  if (kind == DeclKind::kScalar) return d.value();
  if (kind == DeclKind::kVector) return d.storage();
  json rows = json::array();
  for (std::size_t r = 0; r < d.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < d.cols(); ++c) row.push_back(d(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json multipliers(const std::vector<Residual>& rows, const Vec& values) {
  json out = json::array();
  for (const Residual& r : rows) {
    if (r.epigraph) continue;
    json entry;
    entry["line"] = r.origin.line;
    entry["shape"] = {r.shape_rows, r.shape_cols};
    entry["values"] = Vec(values.begin() + static_cast<std::ptrdiff_t>(r.offset),
                          values.begin() + static_cast<std::ptrdiff_t>(r.offset + r.rows));
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace

void apply_config_json(RunConfig& cfg, std::string_view json_text, const std::string& source) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kConfig, source + ": " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::kConfig, source + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    auto bad = [&](const char* what) {
      return Error(ErrorKind::kConfig, source + ": '" + key + "' must be " + what);
    };
    auto positive = [&]() {
      if (!value.is_number() || value.get<double>() <= 0) throw bad("a positive number");
      return value.get<double>();
    };
    auto count = [&]() {
      if (!value.is_number_unsigned() || value.get<std::size_t>() == 0) throw bad("a positive integer");
      return value.get<std::size_t>();
    };
    if (key == "tol") {
      cfg.tolerances.stationarity = cfg.tolerances.complementarity = positive();
    } else if (key == "feas_tol") {
      cfg.tolerances.feasibility = positive();
    } else if (key == "comp_tol") {
      cfg.tolerances.complementarity = positive();
    } else if (key == "max_outer") {
      cfg.max_outer = count();
    } else if (key == "max_inner") {
      cfg.max_inner = count();
    } else if (key == "history") {
      cfg.history = count();
    } else if (key == "seed") {
      if (!value.is_number_unsigned()) throw bad("a nonnegative integer");
      cfg.seed = value.get<std::uint64_t>();
    } else if (key == "verbosity") {
      if (!value.is_number_integer()) throw bad("an integer");
      cfg.verbosity = value.get<int>();
    } else if (key == "init") {
      if (value == "zero") {
        cfg.init = InitMode::kZero;
      } else if (value == "random") {
        cfg.init = InitMode::kRandom;
      } else {
        throw bad("\"zero\" or \"random\"");
      }
    } else {
      throw Error(ErrorKind::kConfig, source + ": unknown key '" + key + "'");
    }
  }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error&) {
    throw Error(ErrorKind::kConfig, "cannot read config file '" + path + "'");
  }
  apply_config_json(cfg, text, path);
}

Env load_bindings(const ProblemSpec& spec, const std::map<std::string, std::string>& files) {
  for (const auto& [name, path] : files) {
    const DeclaredName* d = spec.find(name);
    if (d == nullptr || std::any_of(spec.variables.begin(), spec.variables.end(),
                                    [&](const DeclaredName& v) { return v.decl.name == name; })) {
      throw Error(ErrorKind::kBinding, "data bound to '" + name + "', which is not a declared parameter");
    }
  }
  Env env;
  for (const DeclaredName& p : spec.parameters) {
    const auto it = files.find(p.decl.name);
    if (it == files.end()) {
      throw Error(ErrorKind::kBinding, "parameter '" + p.decl.name + "' has no data (use --data " +
                                           p.decl.name + "=FILE)");
    }
    env.set(p.decl.name, load_data(it->second));
  }
  return env;
}

AuglagConfig solver_config(const RunConfig& cfg, const CompiledProblem& p) {
  AuglagConfig a;
  a.tolerances = cfg.tolerances;
  a.max_outer = cfg.max_outer;
  a.inner.max_iter = cfg.max_inner;
  a.inner.history = cfg.history;
  if (cfg.init == InitMode::kRandom) {
    corpus::Rng rng(cfg.seed);
    for (const VariableBlock& b : p.variables) {
      if (b.auxiliary) continue;
      Dense v(b.rows, b.cols);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = rng.uniform();
      a.start[b.name] = std::move(v);
    }
  }
  return a;
}

std::string report_json(const ProblemSpec& spec, const CompiledProblem& p, const SolverReport& r,
                        std::uint64_t seed) {
  json j;
  j["status"] = std::string(to_string(r.status));
  j["sense"] = p.sense == Sense::kMin ? "min" : "max";
  j["objective"] = r.source_objective;
  json vars = json::object();
  for (const DeclaredName& v : spec.variables) {
    const VariableBlock* b = p.find(v.decl.name);
    if (b == nullptr) continue;
    vars[v.decl.name] = dense_json(p.block_value(*b, r.x), v.kind);
  }
  j["variables"] = std::move(vars);
  j["multipliers"] = {{"equality", multipliers(p.eq, r.lambda)},
                      {"inequality", multipliers(p.ineq, r.mu)}};
  j["kkt"] = {{"stationarity", r.kkt.stationarity},
              {"equality", r.kkt.eq_violation},
              {"inequality", r.kkt.ineq_violation},
              {"complementarity", r.kkt.complementarity}};
  j["tolerances"] = {{"stationarity", r.tolerances.stationarity},
                     {"feasibility", r.tolerances.feasibility},
                     {"complementarity", r.tolerances.complementarity}};
  j["iterations"] = {{"outer", r.outer_iterations}, {"inner", r.inner_iterations}};
  j["rho"] = r.rho;
  j["seed"] = seed;
  j["wall_time"] = r.wall_time;
  return j.dump(2) + "\n";
}

std::pair<std::size_t, std::size_t> parse_extent(std::string_view text) {
  auto number = [&](std::string_view part) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || ptr != part.data() + part.size() || v == 0) {
      throw Error(ErrorKind::kConfig, "bad size '" + std::string(text) + "', expected RxC");
    }
    return v;
  };
  const auto x = text.find('x');
  if (x == std::string_view::npos) return {number(text), 1};
  return {number(text.substr(0, x)), number(text.substr(x + 1))};
}

int exit_code(SolveStatus s) { return s == SolveStatus::kOptimal ? 0 : 2; }

std::string format_error(const Error& e, const std::string& file) {
  std::string out;
  if (e.span()) {
    out = file + ":" + std::to_string(e.span()->line) + ":" + std::to_string(e.span()->column) + ": ";
  }
  out += "error (" + std::string(to_string(e.kind())) + "): " + e.what();
  return out;
}

RunOutcome run(const RunConfig& cfg, std::ostream& log) {
  RunOutcome outcome;
  std::string stage_file = cfg.model_path;
  try {
    const std::string text = read_file(cfg.model_path);
    const ProblemSpec spec = validate(parse_model(text));
    const ProblemSpec smooth = desmooth(spec);
    stage_file = "data";
    const Env data = load_bindings(spec, cfg.data);
    stage_file = cfg.model_path;
    const CompiledProblem p = compile(smooth, data, cfg.sizes);
    AuglagConfig acfg = solver_config(cfg, p);
    if (cfg.verbosity > 0) {
      acfg.observer = [&log](const OuterRecord& rec, const AuglagState&) {
        log << "outer " << rec.iteration << "  rho " << rec.rho << "  violation " << rec.violation
            << "  stationarity " << rec.kkt.stationarity << "  inner " << rec.inner_iterations << " ("
            << to_string(rec.inner_status) << ")\n";
      };
    }
    outcome.solver = solve(p, acfg);
    outcome.report = report_json(spec, p, outcome.solver, cfg.seed);
    outcome.exit_code = exit_code(outcome.solver.status);
    if (!cfg.out.empty()) {
      std::ofstream out(cfg.out, std::ios::binary);
      if (!out) throw Error(ErrorKind::kConfig, "cannot write report to '" + cfg.out + "'");
      out << outcome.report;
    }
    if (outcome.exit_code != 0) {
      log << "solver stopped with status " << to_string(outcome.solver.status) << "\n";
    }
  } catch (const Error& e) {
    outcome.exit_code = 1;
    outcome.report.clear();
    log << format_error(e, stage_file) << "\n";
  }
  return outcome;
}

void write_instance(const corpus::GeneratedInstance& g, std::string_view model_text,
                    const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kConfig, "cannot create directory '" + dir + "': " + ec.message());
  const std::filesystem::path base(dir);
  for (const auto& [name, value] : g.data.values()) write_csv((base / (name + ".csv")).string(), value);
  for (const auto& [name, value] : g.truth) write_csv((base / ("truth_" + name + ".csv")).string(), value);
  std::ofstream model(base / (g.model + ".model"), std::ios::binary);
  if (!model) throw Error(ErrorKind::kConfig, "cannot write model file into '" + dir + "'");
  model << model_text;
}

}  // namespace declsolve::cli
