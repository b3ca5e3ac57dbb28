#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "declsolve/lbfgsb.hpp"
#include "declsolve/reformulate.hpp"

namespace declsolve {

struct AuglagState {
  Vec x;
  Vec lambda;  // equality multipliers
  Vec mu;      // inequality multipliers, kept >= 0
  double rho = 1.0;
  double prev_violation = std::numeric_limits<double>::infinity();
};

struct KktResiduals {
  double stationarity = 0.0;     // |P(grad f + Jh' lambda + Jg' mu)|_inf over the box
  double eq_violation = 0.0;     // |h|_inf
  double ineq_violation = 0.0;   // |max(g, 0)|_inf
  double complementarity = 0.0;  // max |mu_i g_i|
};

struct KktTolerances {
  double stationarity = 1e-6;
  double feasibility = 1e-6;
  double complementarity = 1e-6;
};

bool within(const KktResiduals& r, const KktTolerances& t);

enum class SolveStatus { kOptimal, kMaxOuter, kInnerFail, kStalled };
std::string_view to_string(SolveStatus s);

struct OuterRecord {
  std::size_t iteration = 0;
  double rho = 0.0;  // penalty used for this subproblem
  double violation = 0.0;
  KktResiduals kkt;
  std::size_t inner_iterations = 0;
  InnerStatus inner_status = InnerStatus::kConverged;
  double inner_tolerance = 0.0;
};

struct AuglagConfig {
  KktTolerances tolerances;
  std::size_t max_outer = 100;
  LbfgsOptions inner{1e-6, 5000, 10, 1e-10, {}};
  double rho0 = 1.0;
  double tau = 0.5;
  double rho_max = 1e12;
  /// Start values for declared variables; zero where absent.
  std::map<std::string, Dense> start;
  /// Called after every multiplier update.
  std::function<void(const OuterRecord&, const AuglagState&)> observer;
};

struct SolverReport {
  SolveStatus status = SolveStatus::kMaxOuter;
  Vec x;
  Vec lambda;
  Vec mu;
  double rho = 1.0;
  double f = 0.0;                // minimized objective at x
  double source_objective = 0.0;  // objective as written at x
  KktResiduals kkt;
  KktTolerances tolerances;
  std::size_t outer_iterations = 0;
  std::size_t inner_iterations = 0;
  std::vector<OuterRecord> history;
  double wall_time = 0.0;  // seconds
};

/// L_rho = f + rho/2 |h + lambda/rho|^2 + rho/2 |max(g + mu/rho, 0)|^2 and
/// its gradient at x. Throws kNumeric if the value or gradient is not finite.
double auglag_value_grad(const CompiledProblem& p, const AuglagState& state, const Vec& x,
                         Vec& grad);

/// Doubles rho when violation_now > tau * prev_violation; records
/// violation_now as the new previous value. Returns the new rho.
double update_rho(AuglagState& state, double violation_now, double tau = 0.5);

/// KKT residuals recomputed from scratch at (x, lambda, mu).
KktResiduals compute_kkt(const CompiledProblem& p, const Vec& x, const Vec& lambda, const Vec& mu);

/// Outer loop: minimize L_rho over the box, update multipliers and rho,
/// until the KKT residuals meet the tolerances.
SolverReport solve(const CompiledProblem& p, const AuglagConfig& cfg = {});

}  // namespace declsolve
