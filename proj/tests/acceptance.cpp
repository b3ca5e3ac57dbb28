// Acceptance run: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria. argv[1] is the path of the command-line tool.

#include <sys/wait.h>
#include <unistd.h>

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "declsolve/auglag.hpp"
#include "declsolve/cli.hpp"
#include "declsolve/corpus.hpp"
#include "declsolve/io.hpp"
#include "declsolve/lbfgsb.hpp"
#include "declsolve/model.hpp"
#include "declsolve/reformulate.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace declsolve;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failures; the first few are reported.
class Verdict {
 public:
  void require(bool ok, const std::string& what) {
    if (ok) return;
    pass_ = false;
    if (failures_++ < 3) notes_ += (notes_.empty() ? "" : "; ") + what;
  }
  void note(const std::string& s) { info_ += (info_.empty() ? "" : ", ") + s; }
  Outcome outcome() const {
    Outcome o;
    o.pass = pass_;
    o.detail = pass_ ? info_ : notes_ + (failures_ > 3 ? " (+" + std::to_string(failures_ - 3) + " more)" : "");
    return o;
  }

 private:
  bool pass_ = true;
  int failures_ = 0;
  std::string notes_;
  std::string info_;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Vec to_vec(const VectorXd& v) { return Vec(v.data(), v.data() + v.size()); }

MatrixXd random_spd(Eigen::Index n, std::mt19937_64& gen, double lo, double hi) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(lo, hi);
  MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n * n; ++i) g.data()[i] = nd(gen);
  const MatrixXd q = Eigen::HouseholderQR<MatrixXd>(g).householderQ();
  VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = ud(gen);
  return q * d.asDiagonal() * q.transpose();
}

ObjectiveFn quadratic(const MatrixXd& Q, const VectorXd& c) {
  return [Q, c](const Vec& x, Vec& grad) {
    const VectorXd xe = oracle::to_eigen(x);
    grad = to_vec(Q * xe + c);
    return 0.5 * xe.dot(Q * xe) + c.dot(xe);
  };
}

AuglagConfig tight(double tol) {
  AuglagConfig cfg;
  cfg.tolerances = {tol, tol, tol};
  cfg.inner.tol = tol;
  return cfg;
}

// 1. Objective and augmented Lagrangian gradients against finite differences.
Outcome gradients() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 gen(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (const auto& m : corpus::list_models()) {
    const std::string name(m.name);
    const CompiledProblem p = testing_support::compiled_default(name);
    auto objective = [&](const VectorXd& z) {
      Evaluator e = p.session(to_vec(z));
      return p.eval_objective(e);
    };
    for (int k = 0; k < 10; ++k) {
      Vec x = testing_support::random_vec(p.n, gen, 0.5);
      for (std::size_t i = 0; i < p.n; ++i) x[i] = std::clamp(x[i], p.lower[i], p.upper[i]);
      Evaluator s = p.session(x);
      Vec g;
      p.gather(s, p.objective_gradient, g);
      const double e1 = oracle::relative_error(oracle::to_eigen(g), oracle::fd_gradient(objective, oracle::to_eigen(x)));

      AuglagState st;
      st.x = x;
      st.lambda = testing_support::random_vec(p.m, gen);
      st.mu.resize(p.p);
      for (double& mu : st.mu) mu = u(gen) < 0.3 ? 0.0 : 2.0 * u(gen);
      st.rho = 0.5 + 10.0 * u(gen);
      oracle::move_off_kinks(p, x, st.mu, st.rho, 0.05);
      Vec lg;
      auglag_value_grad(p, st, x, lg);
      auto lagrangian = [&](const VectorXd& z) {
        Vec scratch;
        return auglag_value_grad(p, st, to_vec(z), scratch);
      };
      const double e2 = oracle::relative_error(oracle::to_eigen(lg), oracle::fd_gradient(lagrangian, oracle::to_eigen(x)));
      worst = std::max({worst, e1, e2});
      v.require(e1 <= 1e-6, name + " objective error " + sci(e1));
      v.require(e2 <= 1e-6, name + " L_rho error " + sci(e2));
    }
  }
  const double secs = seconds_since(t0);
  v.require(secs < 10.0, "took " + sci(secs) + " s");
  v.note("worst rel err " + sci(worst));
  v.note(sci(secs) + " s");
  return v.outcome();
}

// 2. Box-constrained and unconstrained quadratics.
Outcome quadratics() {
  Verdict v;
  std::mt19937_64 gen(202);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 3 + (trial * 7) % 28;
    const bool boxed = trial % 2 == 0;
    oracle::BoxQp qp;
    qp.Q = random_spd(n, gen, 0.1, 10.0);
    qp.c = VectorXd(n);
    qp.lo = VectorXd::Constant(n, -kInf);
    qp.hi = VectorXd::Constant(n, kInf);
    for (Eigen::Index i = 0; i < n; ++i) {
      qp.c(i) = 3.0 * nd(gen);
      if (boxed) {
        if (i % 3 != 2) qp.lo(i) = -std::fabs(nd(gen));
        if (i % 4 != 3) qp.hi(i) = std::fabs(nd(gen));
      }
    }
    const VectorXd ref = oracle::box_qp_active_set(qp);
    LbfgsOptions opts;
    opts.tol = 1e-10;
    const InnerResult r = minimize(quadratic(qp.Q, qp.c), Vec(n, 0.0), Box{to_vec(qp.lo), to_vec(qp.hi)}, opts);
    const double gap = std::fabs(r.f - qp.value(ref));
    worst = std::max(worst, gap);
    v.require(gap <= 1e-8, "n=" + std::to_string(n) + " gap " + sci(gap));
  }
  for (Eigen::Index n = 1; n <= 10; ++n) {
    const MatrixXd Q = random_spd(n, gen, 0.5, 5.0);
    VectorXd c(n);
    for (Eigen::Index i = 0; i < n; ++i) c(i) = nd(gen);
    LbfgsOptions opts;
    opts.tol = 1e-10;
    const InnerResult r = minimize(quadratic(Q, c), Vec(n, 0.0), Box::unbounded(n), opts);
    const auto limit = static_cast<std::size_t>(n) + 2;
    v.require(r.status == InnerStatus::kConverged && r.iterations <= limit,
              "dim " + std::to_string(n) + " took " + std::to_string(r.iterations) + " iterations");
  }
  v.note("worst objective gap " + sci(worst));
  return v.outcome();
}

// 3. Multiplier and penalty updates, hand-solved KKT problems.
Outcome outer_loop() {
  Verdict v;
  // update rule on a problem with both row kinds
  const CompiledProblem p = compile_model(
      "variables Vector x min sum(x.^2) - x' * x.^3 / 10 st sum(x) == 1 x.^2 - vector(0.3) <= vector(0)", Env{}, {{"x", {4, 1}}});
  Vec lambda(p.m, 0.0);
  Vec mu(p.p, 0.0);
  std::vector<OuterRecord> records;
  bool multipliers_ok = true;
  AuglagConfig cfg = tight(1e-9);
  cfg.observer = [&](const OuterRecord& rec, const AuglagState& st) {
    Evaluator s = p.session(st.x);
    Vec h;
    Vec g;
    p.eval_eq(s, h);
    p.eval_ineq(s, g);
    for (std::size_t i = 0; i < p.m; ++i) multipliers_ok = multipliers_ok && st.lambda[i] == lambda[i] + rec.rho * h[i];
    for (std::size_t j = 0; j < p.p; ++j) multipliers_ok = multipliers_ok && st.mu[j] == std::max(mu[j] + rec.rho * g[j], 0.0);
    lambda = st.lambda;
    mu = st.mu;
    records.push_back(rec);
  };
  const SolverReport r = solve(p, cfg);
  v.require(r.status == SolveStatus::kOptimal, "rule problem status " + std::string(to_string(r.status)));
  v.require(multipliers_ok, "multiplier update differs from lambda + rho h, max(mu + rho g, 0)");
  for (std::size_t k = 0; k + 1 < records.size(); ++k) {
    const double prev = k == 0 ? kInf : records[k - 1].violation;
    const bool grow = records[k].violation > 0.5 * prev;
    const double expect = grow ? 2.0 * records[k].rho : records[k].rho;
    v.require(records[k + 1].rho == expect, "rho at outer " + std::to_string(k + 1));
  }
  AuglagState st;
  st.rho = 2.0;
  st.prev_violation = 1.0;
  v.require(update_rho(st, 0.5) == 2.0 && update_rho(st, 0.26) == 4.0, "update_rho threshold");

  const CompiledProblem eq = compile_model("variables Scalar x min x^2 st x == 1", Env{});
  const SolverReport a = solve(eq, tight(1e-10));
  v.require(a.status == SolveStatus::kOptimal && std::fabs(a.x[0] - 1.0) <= 1e-8 && std::fabs(a.lambda[0] + 2.0) <= 1e-8,
            "x^2 s.t. x = 1: x=" + sci(a.x[0]) + " lambda=" + sci(a.lambda[0]));
  const CompiledProblem in = compile_model("variables Scalar x min (x - 2)^2 st x - 1 <= 0", Env{});
  const SolverReport b = solve(in, tight(1e-10));
  v.require(b.status == SolveStatus::kOptimal && std::fabs(b.x[0] - 1.0) <= 1e-8 && std::fabs(b.mu[0] - 2.0) <= 1e-8,
            "(x-2)^2 s.t. x <= 1: x=" + sci(b.x[0]) + " mu=" + sci(b.mu[0]));
  v.note(std::to_string(records.size()) + " outer steps checked");
  v.note("lambda*=" + sci(a.lambda[0]) + ", mu*=" + sci(b.mu[0]));
  return v.outcome();
}

// 4. Sparse recovery at 150 x 200 with 15 nonzeros.
Outcome compressed_sensing() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  const auto g = corpus::gen_compressed_sensing(150, 200, 15, 7);
  const CompiledProblem p = compile_model(corpus::find_model("compressed_sensing")->text, g.data);
  AuglagConfig cfg;
  cfg.tolerances.feasibility = 1e-8;
  const SolverReport r = solve(p, cfg);
  const double secs = seconds_since(t0);
  const VectorXd x = oracle::to_eigen(p.block_value(*p.find("x"), r.x));
  const double err = (x - oracle::to_eigen(g.truth.at("x"))).lpNorm<Eigen::Infinity>();
  const double res = (oracle::to_eigen(g.data.at("A")) * x - oracle::to_eigen(g.data.at("b"))).norm();
  v.require(r.status == SolveStatus::kOptimal, "status " + std::string(to_string(r.status)));
  v.require(err <= 1e-5, "|x - x*|_inf = " + sci(err));
  v.require(res <= 1e-6, "|Ax - b| = " + sci(res));
  v.require(secs < 5.0, "took " + sci(secs) + " s");
  v.note("|x - x*|_inf " + sci(err));
  v.note("|Ax - b| " + sci(res));
  v.note(sci(secs) + " s");
  return v.outcome();
}

// 5. Boxed SVM dual with an RBF kernel.
Outcome svm() {
  Verdict v;
  const auto g = corpus::gen_svm(200, 2, 5, 0.5, 1.0);
  const CompiledProblem p = compile_model(corpus::find_model("svm_boxed")->text, g.data);
  const SolverReport r = solve(p);
  const oracle::KktCheck k = oracle::recheck_kkt(p, r.x, r.lambda, r.mu);
  const VectorXd a = oracle::to_eigen(p.block_value(*p.find("a"), r.x));
  const double ya = std::fabs(VectorXd(oracle::to_eigen(g.data.at("y"))).dot(a));
  v.require(r.status == SolveStatus::kOptimal, "status " + std::string(to_string(r.status)));
  v.require(oracle::kkt_passes(k, 1e-4, 1e-4, 1e-4), "KKT recheck stationarity " + sci(k.stationarity));
  v.require(ya <= 1e-6, "|y'a| = " + sci(ya));
  v.require(a.minCoeff() >= 0.0 && a.maxCoeff() <= 1.0, "box violated");
  v.note("stationarity " + sci(k.stationarity));
  v.note("|y'a| " + sci(ya));
  v.note("support " + std::to_string((a.array() > 0.0).count()) + "/200");
  return v.outcome();
}

// 6. Elastic net against coordinate descent.
Outcome elastic_net() {
  Verdict v;
  const double lambda = 0.01;
  const double alpha = 0.5;
  const auto g = corpus::gen_elasticnet(200, 200, 6, lambda, alpha);
  const CompiledProblem p = compile_model(corpus::find_model("elastic_net")->text, g.data);
  const SolverReport r = solve(p, tight(1e-9));
  const MatrixXd X = oracle::to_eigen(g.data.at("X"));
  const VectorXd y = oracle::to_eigen(g.data.at("y"));
  const VectorXd w_cd = oracle::elastic_net_cd(X, y, lambda, alpha);
  const double f_cd = oracle::elastic_net_value(X, y, lambda, alpha, w_cd);
  const double gap = std::fabs(r.source_objective - f_cd);
  v.require(r.status == SolveStatus::kOptimal, "status " + std::string(to_string(r.status)));
  v.require(gap <= 1e-8, "objective gap " + sci(gap));
  v.note("objective gap " + sci(gap));
  return v.outcome();
}

// 7. Symmetric NMF of an exactly factorizable matrix.
Outcome symnmf() {
  Verdict v;
  const auto g = corpus::gen_symnmf(50, 5, 3);
  const CompiledProblem p = compile_model(corpus::find_model("symnmf")->text, g.data, g.sizes);
  AuglagConfig cfg = tight(1e-9);
  corpus::Rng rng(3);
  Dense start(50, 5);
  for (std::size_t i = 0; i < start.size(); ++i) start[i] = rng.uniform();
  cfg.start["U"] = start;
  const SolverReport r = solve(p, cfg);
  const MatrixXd U = oracle::to_eigen(p.block_value(*p.find("U"), r.x));
  const double resid = (oracle::to_eigen(g.data.at("X")) - U * U.transpose()).squaredNorm();
  v.require(resid <= 1e-6, "|T - UU'|^2 = " + sci(resid) + " status " + std::string(to_string(r.status)));
  v.require(U.minCoeff() >= 0.0, "negative entry " + sci(U.minCoeff()));
  v.note("|T - UU'|^2 " + sci(resid));
  return v.outcome();
}

// 8. Nonnegative least squares, both generator variants.
Outcome nnls() {
  Verdict v;
  for (const auto& [variant, m, n] :
       {std::tuple{corpus::NnlsVariant::kI, 100, 300}, std::tuple{corpus::NnlsVariant::kII, 300, 150}}) {
    const auto g = corpus::gen_nnls(variant, m, n, 8);
    const CompiledProblem p = compile_model(corpus::find_model("nnls")->text, g.data);
    const SolverReport r = solve(p);
    const VectorXd x = oracle::to_eigen(p.block_value(*p.find("x"), r.x));
    const MatrixXd A = oracle::to_eigen(g.data.at("A"));
    const VectorXd grad = 2.0 * A.transpose() * (A * x - oracle::to_eigen(g.data.at("b")));
    double worst_active = 0.0;
    double worst_comp = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x(i) == 0.0) worst_active = std::min(worst_active, grad(i));
      worst_comp = std::max(worst_comp, std::fabs(x(i) * grad(i)));
    }
    const std::string tag = variant == corpus::NnlsVariant::kI ? "i" : "ii";
    v.require(r.status == SolveStatus::kOptimal, tag + " status " + std::string(to_string(r.status)));
    v.require(x.minCoeff() >= 0.0, tag + " negative entry");
    v.require(worst_active >= -1e-6, tag + " active gradient " + sci(worst_active));
    v.require(worst_comp <= 1e-6, tag + " complementarity " + sci(worst_comp));
    v.note(tag + ": active " + std::to_string((x.array() == 0.0).count()) + "/" + std::to_string(n) +
           ", x_i g_i " + sci(worst_comp));
  }
  return v.outcome();
}

// 9. Epigraph rewrite against a projected-subgradient oracle.
Outcome epigraph() {
  Verdict v;
  const std::string text =
      "parameters Matrix A Vector b Vector c Vector lo Vector hi variables Vector x "
      "min norm1(x - c) + 0.5 * norm2(A*x - b).^2 st x >= lo x <= hi";
  std::mt19937_64 gen(909);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  int certified = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index n = 2 + trial % 9;
    const Eigen::Index m = 1 + trial % 5;
    oracle::L1Problem q;
    q.A = MatrixXd(m, n);
    for (Eigen::Index i = 0; i < q.A.size(); ++i) q.A.data()[i] = nd(gen);
    q.b = VectorXd(m);
    for (Eigen::Index i = 0; i < m; ++i) q.b(i) = 2.0 * nd(gen);
    q.c = VectorXd(n);
    q.lo = VectorXd(n);
    q.hi = VectorXd(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      q.c(i) = nd(gen);
      q.lo(i) = -1.0 - std::fabs(nd(gen));
      q.hi(i) = 0.2 + std::fabs(nd(gen));
    }
    Env data;
    data.set("A", oracle::from_eigen(q.A));
    data.set("b", oracle::from_eigen(q.b));
    data.set("c", oracle::from_eigen(q.c));
    data.set("lo", oracle::from_eigen(q.lo));
    data.set("hi", oracle::from_eigen(q.hi));
    const CompiledProblem p = compile_model(text, data);
    const SolverReport r = solve(p, tight(1e-10));
    const oracle::L1Solution ref = oracle::l1_projected_subgradient(q);
    certified += ref.certified ? 1 : 0;
    const double gap = std::fabs(r.source_objective - ref.value);
    worst = std::max(worst, gap);
    v.require(r.status == SolveStatus::kOptimal, "trial " + std::to_string(trial) + " status " + std::string(to_string(r.status)));
    v.require(ref.certified, "trial " + std::to_string(trial) + " oracle optimum not certified");
    v.require(gap <= 1e-6, "trial " + std::to_string(trial) + " gap " + sci(gap) + " (solver " + std::to_string(r.source_objective) + " kkt " + sci(ref.kkt) +
                               ", oracle " + std::to_string(ref.value) + (ref.certified ? " certified" : " uncertified") + ")");
  }
  v.note("worst gap " + sci(worst));
  v.note(std::to_string(certified) + "/10 oracle optima certified");
  return v.outcome();
}

int run_command(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 10. Command-line tool on every bundled model.
Outcome end_to_end(const std::string& tool) {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path root = fs::temp_directory_path() / ("declsolve_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  std::size_t solved = 0;
  for (const std::string& name : testing_support::all_model_names()) {
    const fs::path dir = root / name;
    fs::create_directories(dir);
    const std::uint64_t seed = 2;
    if (run_command("\"" + tool + "\" gen " + name + " --seed " + std::to_string(seed) + " --out \"" + dir.string() +
                    "\" > \"" + (dir / "cmd.txt").string() + "\"") != 0) {
      v.require(false, name + ": gen failed");
      continue;
    }
    std::string cmd = slurp(dir / "cmd.txt");
    while (!cmd.empty() && (cmd.back() == '\n' || cmd.back() == '\r')) cmd.pop_back();
    const bool random_start = name == "symnmf";
    const std::string extra = random_start ? " --init random --seed 3" : "";
    const fs::path report = dir / "report.json";
    const int code = run_command("\"" + tool + "\" " + cmd + extra + " --out \"" + report.string() + "\" 2> \"" +
                                 (dir / "log.txt").string() + "\"");
    v.require(code == 0, name + ": exit " + std::to_string(code));
    if (code != 0) continue;

    // same run in process, for the full primal-dual point
    const auto g = corpus::default_instance(name, seed);
    cli::RunConfig cfg;
    cfg.model_path = (dir / (name + ".model")).string();
    for (const auto& [param, value] : g.data.values()) cfg.data[param] = (dir / (param + ".csv")).string();
    cfg.sizes = g.sizes;
    if (random_start) {
      cfg.init = cli::InitMode::kRandom;
      cfg.seed = 3;
    }
    std::ostringstream log;
    const cli::RunOutcome in = cli::run(cfg, log);
    json a = json::parse(slurp(report));
    json b = json::parse(in.report);
    a.erase("wall_time");
    b.erase("wall_time");
    v.require(a == b, name + ": tool and library reports differ");
    const CompiledProblem p = compile(desmooth(validate(parse_model(read_file(cfg.model_path)))),
                                      cli::load_bindings(validate(parse_model(read_file(cfg.model_path))), cfg.data),
                                      cfg.sizes);
    const oracle::KktCheck k = oracle::recheck_kkt(p, in.solver.x, in.solver.lambda, in.solver.mu);
    const KktTolerances& t = in.solver.tolerances;
    v.require(oracle::kkt_passes(k, t.stationarity, t.feasibility, t.complementarity),
              name + ": KKT recheck stationarity " + sci(k.stationarity));
    ++solved;
  }
  fs::remove_all(root);
  const double secs = seconds_since(t0);
  v.require(secs < 120.0, "took " + sci(secs) + " s");
  v.note(std::to_string(solved) + " models");
  v.note(sci(secs) + " s");
  return v.outcome();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance PATH_TO_DECLSOLVE\n";
    return 64;
  }
  const std::string tool = argv[1];
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient suite: 8 models and L_rho vs finite differences, rel err <= 1e-6, < 10 s", gradients},
      {"L-BFGS-B: 20 quadratics within 1e-8 of active-set oracle; dim <= 10 in <= dim+2 iterations", quadratics},
      {"outer loop: multiplier and rho updates; x^2|x=1 -> lambda=-2, (x-2)^2|x<=1 -> mu=2 to 1e-8", outer_loop},
      {"compressed sensing 150x200, 15 nonzeros: |x-x*|_inf <= 1e-5, |Ax-b| <= 1e-6, < 5 s", compressed_sensing},
      {"SVM dual m=200, gamma=1/2, C=1: KKT <= 1e-4, |y'a| <= 1e-6, box exact", svm},
      {"elastic net 200x200 within 1e-8 of coordinate descent", elastic_net},
      {"symmetric NMF n=50, k=5: |T-UU'|^2 <= 1e-6, U >= 0", symnmf},
      {"NNLS 100x300 (i) and 300x150 (ii): x >= 0, active grad >= -1e-6, x_i g_i <= 1e-6", nnls},
      {"epigraph rewrite: 10 l1 problems within 1e-6 of projected-subgradient oracle", epigraph},
      {"command line: every bundled model solves with exit 0 and passes KKT recheck, < 2 min",
       [&] { return end_to_end(tool); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << ". " << criteria[i].first;
    if (!o.detail.empty()) std::cout << " [" << o.detail << "]";
    std::cout << std::endl;
  }
  return failed;
}
