#pragma once

#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "declsolve/dense.hpp"
#include "declsolve/expr.hpp"
#include "declsolve/kernels.hpp"

namespace declsolve {

/// Named dense values for parameters and variables.
class Env {
 public:
  void set(const std::string& name, Dense value);
  const Dense* find(const std::string& name) const;
  const Dense& at(const std::string& name) const;
  bool contains(const std::string& name) const { return values_.count(name) != 0; }

  void set_symmetric(const std::string& name, bool symmetric);
  bool symmetric(const std::string& name) const;

  const std::map<std::string, Dense>& values() const noexcept { return values_; }

  /// Sizes of symbolic dims known ahead of evaluation (e.g. from binding).
  DimBinding dims;

 private:
  std::map<std::string, Dense> values_;
  std::map<std::string, bool> symmetric_;
};

/// One evaluation session over an Env. Every node is computed at most once
/// per session (cache keyed by node identity), so evaluating several
/// expressions that share subtrees pays for the shared part once.
///
/// `bind` adds session-local values (e.g. multiplier seeds) on top of the
/// Env; a name must be bound before any expression reading it is evaluated.
class Evaluator {
 public:
  explicit Evaluator(const Env& env, const kernels::Table& table = kernels::active());

  /// Cached value of `e`. Does not check for non-finite entries.
  const Dense& value(const Expr& e);
  void bind(const std::string& name, Dense v);

  std::size_t nodes_evaluated() const noexcept { return evaluated_; }

 private:
  const Dense& lookup(const ExprNode& n);
  void bind_dims(const Expr& e);
  std::size_t resolve(const Dim& d, const ExprNode& n) const;
  Dense compute(const ExprNode& n);
  Dense matmul(const ExprNode& n);

  const Env& env_;
  const kernels::Table& table_;
  std::unordered_map<std::string, Dense> overlay_;
  std::unordered_map<const ExprNode*, std::unique_ptr<Dense>> cache_;
  std::unordered_map<const ExprNode*, bool> dims_seen_;
  DimBinding dims_;
  std::size_t evaluated_ = 0;
};

/// Evaluates `e` under `env`. Throws kNumeric if the result has non-finite
/// entries and kDimension if bound values disagree with the expression.
Dense eval(const Expr& e, const Env& env);

/// Evaluates `e` and every expression in `also` in one session.
std::vector<Dense> eval_batch(const Expr& e, const Env& env, const std::vector<Expr>& also);

}  // namespace declsolve
