#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <string_view>
#include <vector>

#include "declsolve/dense.hpp"

namespace declsolve {

using Vec = std::vector<double>;

/// Value and gradient at x. Returning a non-finite value marks x as outside
/// the domain; the line search then backs off.
using ObjectiveFn = std::function<double(const Vec& x, Vec& grad)>;

struct Box {
  Vec lower;
  Vec upper;

  static Box unbounded(std::size_t n);
  std::size_t size() const noexcept { return lower.size(); }
  bool contains(const Vec& x) const;
  void clip(Vec& x) const;
};

/// Projected gradient: g_i, except 0 when x_i sits at a bound and g_i
/// points out of the box.
Vec projected_gradient(const Vec& x, const Vec& g, const Box& box);
double projected_gradient_norm(const Vec& x, const Vec& g, const Box& box);

/// Limited-memory BFGS matrix in compact form B = theta I - W M W',
/// W = [Y, theta S].
class LbfgsMemory {
 public:
  explicit LbfgsMemory(std::size_t n, std::size_t history = 10, double eps_curv = 1e-10);

  /// Stores (s, y) if s'y > eps_curv |s| |y|; returns whether it did.
  bool push(const Vec& s, const Vec& y);
  void clear();

  std::size_t size() const noexcept { return s_.size(); }
  std::size_t history() const noexcept { return history_; }
  std::size_t dim() const noexcept { return n_; }
  bool empty() const noexcept { return s_.empty(); }
  /// Base scaling theta = y'y / s'y of the newest pair (1 when empty).
  double theta() const noexcept { return theta_; }
  /// gamma = 1 / theta = s'y / y'y.
  double gamma() const noexcept { return 1.0 / theta_; }
  const std::vector<Vec>& s() const noexcept { return s_; }
  const std::vector<Vec>& y() const noexcept { return y_; }

  /// Width of W (2 * size()).
  std::size_t width() const noexcept { return 2 * s_.size(); }
  /// Row i of W.
  void w_row(std::size_t i, double* out) const;
  /// W' v.
  Vec wt_times(const Vec& v) const;
  /// W p.
  Vec w_times(const Vec& p) const;
  /// M v for v of length width().
  Vec m_times(const Vec& v) const;
  /// B v.
  Vec b_times(const Vec& v) const;
  const Dense& middle() const noexcept { return m_; }

 private:
  void rebuild();

  std::size_t n_;
  std::size_t history_;
  double eps_curv_;
  std::vector<Vec> s_;
  std::vector<Vec> y_;
  double theta_ = 1.0;
  Dense m_;
};

struct CauchyResult {
  Vec x_cp;
  std::vector<bool> free;  // not at a bound at the Cauchy point
  Vec c;                   // W'(x_cp - x), used by the subspace step
};

/// Generalized Cauchy point: first minimizer of the quadratic model
/// m(z) = g'(z-x) + 1/2 (z-x)'B(z-x) along the projected path x(t) = P(x - t g).
CauchyResult cauchy_point(const Vec& x, const Vec& g, const LbfgsMemory& memory, const Box& box);

enum class SubspaceOutcome { kCauchy, kInterior, kClipped, kRay };

struct SubspaceResult {
  Vec x_bar;
  SubspaceOutcome outcome = SubspaceOutcome::kCauchy;
};

/// Minimizes the model over the free variables starting from the Cauchy
/// point, clips the minimizer into the box, and if the clipped point is not a
/// descent point from x, takes the farthest feasible point on the segment
/// from x_cp toward the unconstrained minimizer instead.
SubspaceResult subspace_min(const Vec& x, const Vec& g, const CauchyResult& cp,
                            const LbfgsMemory& memory, const Box& box);

struct LineSearchOptions {
  double c1 = 1e-4;
  double c2 = 0.9;
  double xtol = 1e-12;
  int max_trials = 40;
  /// After a strong Wolfe step, if the slice looks exactly quadratic, try
  /// its minimizer once more.
  bool quadratic_refine = true;
  /// When the search fails because f is flat to rounding, accept a step with
  /// c2 slope0 <= slope(a) <= (1 - 2 c1) |slope0| and f(a) <= f0 + eps |f0|
  /// (approximate Wolfe conditions). 0 disables the fallback.
  double approx_wolfe_eps = 1e-12;
};

// kSufficientDecrease: only the decrease condition holds (the search hit
// step_max or ran out of trials); the step is still usable.
// kApproximate: only the approximate Wolfe conditions hold.
enum class LineSearchStatus { kConverged, kSufficientDecrease, kApproximate, kFailed };

struct LineSearchResult {
  double step = 0.0;
  double f = 0.0;
  double slope = 0.0;  // directional derivative at step
  int evaluations = 0;
  LineSearchStatus status = LineSearchStatus::kFailed;
};

/// phi(a) returns f(x + a d) and writes d'grad into `slope`.
using SliceFn = std::function<double(double step, double& slope)>;

/// Moré-Thuente search for a step with f(a) <= f0 + c1 a slope0 and
/// |slope(a)| <= c2 |slope0| in (0, step_max]. Non-finite trial values shrink
/// the step toward the last finite one and cap the search there.
LineSearchResult line_search(const SliceFn& phi, double f0, double slope0, double step0,
                             double step_max, const LineSearchOptions& opts = {});

enum class InnerStatus { kConverged, kMaxIter, kLineSearchFail, kNumericError };
std::string_view to_string(InnerStatus s);

struct LbfgsOptions {
  double tol = 1e-8;
  std::size_t max_iter = 10000;
  std::size_t history = 10;
  double eps_curv = 1e-10;
  LineSearchOptions line_search;
};

struct IterationInfo {
  std::size_t iteration = 0;
  const Vec* x = nullptr;
  double f = 0.0;
  const Vec* g = nullptr;
  double step = 0.0;
  bool pair_stored = false;
  const LbfgsMemory* memory = nullptr;
  /// How the step was accepted. kApproximate steps may leave f unchanged
  /// up to approx_wolfe_eps |f|; every other step decreases f strictly.
  LineSearchStatus line_search = LineSearchStatus::kConverged;
};

struct InnerResult {
  Vec x;
  double f = 0.0;
  Vec g;
  InnerStatus status = InnerStatus::kMaxIter;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  double projected_gradient = 0.0;
};

/// Box-constrained L-BFGS-B. Every iterate lies in the box exactly.
InnerResult minimize(const ObjectiveFn& fg, Vec x0, const Box& box, const LbfgsOptions& opts = {},
                     const std::function<void(const IterationInfo&)>& observer = {});

}  // namespace declsolve
