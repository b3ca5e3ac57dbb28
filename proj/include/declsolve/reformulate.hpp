#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "declsolve/diff.hpp"
#include "declsolve/eval.hpp"
#include "declsolve/model.hpp"

namespace declsolve {

/// Replaces every norm1/abs term by an auxiliary variable t with
/// `e - t <= 0` and `-e - t <= 0`. A term may be replaced only where it is
/// pushed down by the objective sense (or by the side of an inequality it
/// sits on): through +, -, unary minus, sum, multiplication by a nonnegative
/// constant or Scalar parameter, and division by a positive one. Any other
/// position throws kNonConvexNonSmooth. Auxiliary names start with `_t`,
/// which model identifiers cannot. Smooth input is returned unchanged.
ProblemSpec desmooth(const ProblemSpec& spec);

struct VariableBlock {
  std::string name;
  Shape shape;  // concrete after compile
  std::size_t rows = 1;
  std::size_t cols = 1;
  std::size_t offset = 0;
  bool auxiliary = false;
  std::size_t size() const noexcept { return rows * cols; }
};

struct Residual {
  Expr expr;  // row values, stacked row-major
  std::size_t offset = 0;
  std::size_t rows = 0;        // total entries
  std::size_t shape_rows = 1;  // extents of the residual value
  std::size_t shape_cols = 1;
  Span origin;
  std::string seed;  // name of the multiplier parameter used in the Lagrangian
  bool epigraph = false;
};

/// min f(x)  s.t.  h(x) = 0,  g(x) <= 0,  lower <= x <= upper.
class CompiledProblem {
 public:
  std::vector<VariableBlock> variables;
  std::size_t n = 0;
  std::size_t m = 0;  // equality rows
  std::size_t p = 0;  // inequality rows

  Expr objective;           // minimized form
  Expr source_objective;    // as written, before rewriting and negation
  Sense sense = Sense::kMin;
  std::vector<Residual> eq;
  std::vector<Residual> ineq;
  std::vector<double> lower;
  std::vector<double> upper;

  GradientSet objective_gradient;
  /// Gradient of f + sum_i <U_i, h_i> + sum_j <V_j, g_j>, where U_i/V_j are
  /// the parameters named by Residual::seed.
  GradientSet lagrangian_gradient;

  std::vector<EpigraphVariable> epigraph;
  Env data;

  // Row accounting: every written constraint row becomes one equality row,
  // one inequality row, or one bound.
  std::size_t source_rows = 0;    // rows of the constraints as written
  std::size_t epigraph_rows = 0;  // rows added by the rewrite
  std::size_t bound_rows = 0;     // rows absorbed into lower/upper

  const VariableBlock* find(std::string_view name) const;

  /// Evaluation session with every variable block bound from `x`.
  Evaluator session(const std::vector<double>& x) const;
  /// Flat-vector values of a variable block in `x`.
  Dense block_value(const VariableBlock& b, const std::vector<double>& x) const;

  /// Evaluates the blocks of `grads` in `s` into a flat gradient.
  void gather(Evaluator& s, const GradientSet& grads, std::vector<double>& out) const;

  /// Binds the Lagrangian seeds from flat vectors of length m and p.
  void bind_seeds(Evaluator& s, const std::vector<double>& u, const std::vector<double>& v) const;

  double eval_objective(Evaluator& s) const;
  void eval_eq(Evaluator& s, std::vector<double>& out) const;
  void eval_ineq(Evaluator& s, std::vector<double>& out) const;

  /// Starting point: given values (or zero) for declared variables, clipped
  /// to the box; auxiliary variables at |e(x)| + 1.
  std::vector<double> initial_point(const std::map<std::string, Dense>& start = {}) const;

  /// Value of the objective as written, at a point.
  double source_objective_value(const std::vector<double>& x) const;
};

/// Extents (rows, cols) for variables whose size the data leaves open.
using VariableSizes = std::map<std::string, std::pair<std::size_t, std::size_t>>;

/// Binds data, sizes all variables, extracts simple bounds, and builds the
/// standard form with its symbolic gradients. Throws kBinding for missing or
/// ill-shaped data, kShapeUnification when a variable size is not determined
/// or data conflicts, kInfeasibleBounds, and kNonSmoothResidue if a
/// non-smooth node survived the rewrite.
CompiledProblem compile(const ProblemSpec& spec, const Env& data, const VariableSizes& sizes = {});

/// parse_model + validate + desmooth + compile.
CompiledProblem compile_model(std::string_view text, const Env& data, const VariableSizes& sizes = {});

}  // namespace declsolve
