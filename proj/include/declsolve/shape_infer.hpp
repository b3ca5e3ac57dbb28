#pragma once

#include <string>
#include <vector>

#include "declsolve/expr.hpp"

namespace declsolve {

enum class Role { kParameter, kVariable };

struct Declaration {
  std::string name;
  Shape shape;  // declared kind with symbolic dims
  Role role = Role::kParameter;
  bool symmetric = false;
  Span span;
};

/// Unification-based shape inference. Declarations carry symbolic dims; each
/// operator constrains them, and conflicting concrete sizes or structurally
/// incompatible operands are reported as kShapeMismatch at the offending node.
///
/// Usage: create dims for declarations with `fresh()`, `annotate` every raw
/// expression of a model, then `finish` each annotated tree so shapes refer
/// to canonical dims only.
class ShapeInference {
 public:
  Dim fresh(bool anchored = true);
  Shape declare_scalar() { return Shape::scalar(); }
  Shape declare_vector() { return Shape::vector(fresh()); }
  Shape declare_matrix() { return Shape::matrix(fresh(), fresh()); }

  Expr annotate(const Expr& raw, const std::vector<Declaration>& decls);

  /// Rebuilds `e` with canonical dims. Call after every annotate of the model.
  Expr finish(const Expr& e);
  Shape canonical(const Shape& s);
  Dim canonical(Dim d);

  /// Throws if some `vector(s)` broadcast has a dimension not tied to any
  /// declared object.
  void check_broadcasts();

  /// Unifies two dims; `where` names the node for diagnostics.
  void unify(Dim a, Dim b, const ExprNode& where);

 private:
  int find(int id);
  Shape annotate_op(const ExprNode& n, const std::vector<Expr>& kids);

  std::vector<int> parent_;
  std::vector<long long> size_;  // concrete size at a root, -1 if unknown
  std::vector<bool> anchored_;   // class contains a declared dim
  std::vector<std::pair<int, Span>> broadcasts_;
};

/// Single-expression convenience over ShapeInference. `decls` shapes must use
/// symbols allocated by `inference` when several expressions share dims.
Expr infer_shape(const Expr& raw, const std::vector<Declaration>& decls);

}  // namespace declsolve
