#include "declsolve/auglag.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace declsolve {
namespace {

double inf_norm(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

double positive_inf_norm(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

// L_rho and its gradient; NaN when something is not finite.
double lagrangian(const CompiledProblem& p, const AuglagState& st, const Vec& x, Vec& grad) {
  Evaluator s = p.session(x);
  const double f = p.eval_objective(s);
  Vec h;
  Vec g;
  p.eval_eq(s, h);
  p.eval_ineq(s, g);
  const double rho = st.rho;
  Vec u(p.m);
  Vec v(p.p);
  double eq_term = 0.0;
  for (std::size_t i = 0; i < p.m; ++i) {
    const double a = h[i] + st.lambda[i] / rho;
    eq_term += a * a;
    u[i] = rho * a;
  }
  double ineq_term = 0.0;
  for (std::size_t j = 0; j < p.p; ++j) {
    const double a = std::max(g[j] + st.mu[j] / rho, 0.0);
    ineq_term += a * a;
    v[j] = rho * a;
  }
  const double value = f + 0.5 * rho * eq_term + 0.5 * rho * ineq_term;
  p.bind_seeds(s, u, v);
  p.gather(s, p.lagrangian_gradient, grad);
  if (!std::isfinite(value)) return std::numeric_limits<double>::quiet_NaN();
  for (double gi : grad) {
    if (!std::isfinite(gi)) return std::numeric_limits<double>::quiet_NaN();
  }
  return value;
}

}  // namespace

bool within(const KktResiduals& r, const KktTolerances& t) {
  return r.stationarity <= t.stationarity && r.eq_violation <= t.feasibility &&
         r.ineq_violation <= t.feasibility && r.complementarity <= t.complementarity;
}

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "Optimal";
    case SolveStatus::kMaxOuter: return "MaxOuter";
    case SolveStatus::kInnerFail: return "InnerFail";
    case SolveStatus::kStalled: return "Stalled";
  }
  return "?";
}

double auglag_value_grad(const CompiledProblem& p, const AuglagState& state, const Vec& x,
                         Vec& grad) {
  const double v = lagrangian(p, state, x, grad);
  if (!std::isfinite(v)) {
    throw Error(ErrorKind::kNumeric, "augmented Lagrangian is not finite at the given point");
  }
  return v;
}

double update_rho(AuglagState& state, double violation_now, double tau) {
  if (violation_now > tau * state.prev_violation) state.rho *= 2.0;
  state.prev_violation = violation_now;
  return state.rho;
}

KktResiduals compute_kkt(const CompiledProblem& p, const Vec& x, const Vec& lambda, const Vec& mu) {
  Evaluator s = p.session(x);
  Vec h;
  Vec g;
  p.eval_eq(s, h);
  p.eval_ineq(s, g);
  p.bind_seeds(s, lambda, mu);
  Vec grad;
  p.gather(s, p.lagrangian_gradient, grad);
  KktResiduals r;
  r.stationarity = projected_gradient_norm(x, grad, Box{p.lower, p.upper});
  r.eq_violation = inf_norm(h);
  r.ineq_violation = positive_inf_norm(g);
  for (std::size_t j = 0; j < p.p; ++j) {
    r.complementarity = std::max(r.complementarity, std::fabs(mu[j] * g[j]));
  }
  return r;
}

SolverReport solve(const CompiledProblem& p, const AuglagConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  SolverReport rep;
  rep.tolerances = cfg.tolerances;

  AuglagState st;
  st.x = p.initial_point(cfg.start);
  st.lambda.assign(p.m, 0.0);
  st.mu.assign(p.p, 0.0);
  st.rho = cfg.rho0;
  const Box box{p.lower, p.upper};

  auto violation_at = [&](const Vec& x) {
    Evaluator s = p.session(x);
    Vec h;
    Vec g;
    p.eval_eq(s, h);
    p.eval_ineq(s, g);
    return std::max(inf_norm(h), positive_inf_norm(g));
  };

  auto finish = [&](SolveStatus status) {
    rep.status = status;
    rep.x = st.x;
    rep.lambda = st.lambda;
    rep.mu = st.mu;
    rep.rho = st.rho;
    Evaluator s = p.session(st.x);
    rep.f = p.eval_objective(s);
    rep.source_objective = s.value(p.source_objective).value();
    rep.kkt = compute_kkt(p, st.x, st.lambda, st.mu);
    rep.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return rep;
  };

  double violation = violation_at(st.x);
  bool previous_inner_failed = false;
  double best_score = std::numeric_limits<double>::infinity();

  for (std::size_t k = 1; k <= cfg.max_outer; ++k) {
    LbfgsOptions inner = cfg.inner;
    inner.tol = std::max(cfg.tolerances.stationarity, 0.1 * (std::isfinite(violation) ? violation : 0.0));
    const double rho_used = st.rho;
    const ObjectiveFn fg = [&](const Vec& x, Vec& grad) { return lagrangian(p, st, x, grad); };
    InnerResult r = minimize(fg, st.x, box, inner);
    rep.inner_iterations += r.iterations;
    rep.outer_iterations = k;
    if (r.status == InnerStatus::kNumericError) return finish(SolveStatus::kInnerFail);
    st.x = r.x;

    // multiplier updates
    Evaluator s = p.session(st.x);
    Vec h;
    Vec g;
    p.eval_eq(s, h);
    p.eval_ineq(s, g);
    for (std::size_t i = 0; i < p.m; ++i) st.lambda[i] = st.lambda[i] + st.rho * h[i];
    for (std::size_t j = 0; j < p.p; ++j) st.mu[j] = std::max(st.mu[j] + st.rho * g[j], 0.0);
    violation = std::max(inf_norm(h), positive_inf_norm(g));

    OuterRecord rec;
    rec.iteration = k;
    rec.rho = rho_used;
    rec.violation = violation;
    rec.kkt = compute_kkt(p, st.x, st.lambda, st.mu);
    rec.inner_iterations = r.iterations;
    rec.inner_status = r.status;
    rec.inner_tolerance = inner.tol;
    rep.history.push_back(rec);
    if (cfg.observer) cfg.observer(rec, st);

    if (within(rec.kkt, cfg.tolerances)) return finish(SolveStatus::kOptimal);

    // A failed inner solve is tolerated while the outer iterates still improve.
    const double score = std::max({rec.kkt.stationarity / cfg.tolerances.stationarity,
                                   rec.kkt.eq_violation / cfg.tolerances.feasibility,
                                   rec.kkt.ineq_violation / cfg.tolerances.feasibility,
                                   rec.kkt.complementarity / cfg.tolerances.complementarity});
    const bool inner_failed = r.status == InnerStatus::kLineSearchFail;
    const bool progress = score < best_score;
    best_score = std::min(best_score, score);
    if (inner_failed && previous_inner_failed && !progress) {
      return finish(SolveStatus::kInnerFail);
    }
    previous_inner_failed = inner_failed;

    update_rho(st, violation, cfg.tau);
    if (st.rho > cfg.rho_max) return finish(SolveStatus::kStalled);
  }
  return finish(SolveStatus::kMaxOuter);
}

}  // namespace declsolve
