#pragma once

#include <map>
#include <string>
#include <vector>

#include "declsolve/eval.hpp"
#include "declsolve/expr.hpp"

namespace declsolve {

/// Variable name -> gradient expression with the variable's shape.
using GradientSet = std::map<std::string, Expr>;

struct DiffVariable {
  std::string name;
  Shape shape;
};

/// Reverse-mode symbolic differentiation of a Scalar expression. Gradients
/// follow the same-shape convention: the gradient with respect to w has the
/// shape of w. Variables that `f` does not reference get a zero gradient.
///
/// Throws kNonScalarSource if `f` is not Scalar and kNonSmoothNode if an
/// abs/norm1 node lies on a path to a differentiated variable.
GradientSet differentiate(const Expr& f, const std::vector<DiffVariable>& vars);

/// Same, with variable shapes taken from their occurrences in `f`.
GradientSet differentiate(const Expr& f, const std::vector<std::string>& vars);

/// Gradient of sum(seed .* f) for an `f` of any shape; `seed` must have the
/// shape of `f`. This is the transposed-Jacobian product J' seed.
GradientSet differentiate_seeded(const Expr& f, const Expr& seed,
                                 const std::vector<DiffVariable>& vars);

/// Compares `grads` against central differences of `f` at `env` with step
/// eps * (1 + |x_i|). The error of coordinate i is |fd_i - g_i| divided by
/// max(1, |g|_inf, |fd|_inf); the largest one is returned. Throws kNumeric
/// if `f` is non-finite at a probe point.
double check_gradient(const Expr& f, const GradientSet& grads, const Env& env, double eps = 1e-6);

}  // namespace declsolve
