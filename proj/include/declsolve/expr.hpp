#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "declsolve/error.hpp"
#include "declsolve/shape.hpp"

namespace declsolve {

enum class Op {
  kAdd,
  kSub,
  kNeg,
  kMul,   // matrix product, or scaling when one side is Scalar
  kDiv,   // division by a Scalar
  kEMul,  // .*
  kEDiv,  // ./
  kPow,   // ^ on a Scalar base
  kEPow,  // .^ elementwise, Scalar exponent
  kLog,
  kExp,
  kSin,
  kCos,
  kTanh,
  kAbs,
  kNorm1,
  kNorm2,
  kSum,
  kTrace,
  kDet,
  kInv,
  kTranspose,
  kBroadcast,  // scalar filled into the node's shape; `vector(s)` in models
  kIdentity,   // internal: identity matrix of the node's shape
  kConstant,
  kParameter,
  kVariable,
};

std::string_view op_name(Op op);
bool is_elementwise_unary(Op op);
bool is_leaf(Op op);
/// Operators whose derivative is undefined somewhere on their domain and that
/// must be removed by the epigraph rewrite before differentiation.
bool is_nonsmooth(Op op);

struct ExprNode;
/// Immutable, shareable expression handle.
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  Op op;
  Shape shape;
  std::vector<Expr> children;
  std::string name;        // parameter/variable reference
  double value = 0.0;      // constant
  bool symmetric = false;  // parameter declared `symmetric`
  Span span;
};

/// Unchecked construction, used by the parser before shapes are known.
Expr make_node(Op op, std::vector<Expr> children, Span span = {});
Expr make_constant(double value, Span span = {});
Expr make_ref(Op op, std::string name, Span span = {});

/// Copy of `e` with a different shape and children; everything else kept.
Expr with_shape(const Expr& e, Shape shape, std::vector<Expr> children);

/// Shape-aware builders for annotated trees. They check operand shapes
/// (dims must agree exactly), and fold constants and trivial identities
/// (`0*x`, `x+0`, `1*x`, `(x')'`). Mismatches throw kShapeMismatch.
namespace build {

Expr constant(double v);
Expr parameter(std::string name, Shape shape, bool symmetric = false);
Expr variable(std::string name, Shape shape);
Expr zero(const Shape& shape);
Expr broadcast(const Expr& scalar, const Shape& shape);
Expr identity(Dim n);

Expr add(const Expr& a, const Expr& b);
Expr sub(const Expr& a, const Expr& b);
Expr neg(const Expr& a);
Expr mul(const Expr& a, const Expr& b);
Expr div(const Expr& a, const Expr& b);
Expr emul(const Expr& a, const Expr& b);
Expr ediv(const Expr& a, const Expr& b);
Expr pow(const Expr& base, const Expr& exponent);
Expr epow(const Expr& base, const Expr& exponent);
Expr unary(Op op, const Expr& a);
Expr transpose(const Expr& a);
Expr sum(const Expr& a);
Expr norm2(const Expr& a);
Expr trace(const Expr& a);
Expr det(const Expr& a);
Expr inv(const Expr& a);
/// Scalar inner product sum(a .* b), simplified when either side is a
/// broadcast scalar or both are Scalar.
Expr inner(const Expr& a, const Expr& b);
/// Dispatch by operator, for rebuilding a node from new children.
Expr apply(Op op, const std::vector<Expr>& children);

}  // namespace build

bool is_zero(const Expr& e);
bool is_constant(const Expr& e, double v);

/// Structural equality ignoring source spans.
bool structurally_equal(const Expr& a, const Expr& b);

/// Hash-consing: returns copies in which structurally identical subtrees are
/// the same object, so pointer-keyed caches share their values.
class Interner {
 public:
  Expr intern(const Expr& e);

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_ = nullptr;
};

/// Model-syntax rendering with minimal parentheses. Internal operators print
/// as `matrix(s)` and `eye(n)`.
std::string to_string(const Expr& e);

/// Number of distinct nodes (by identity) reachable from the roots.
std::size_t count_nodes(const std::vector<Expr>& roots);

/// Names of referenced variables (op == kVariable), in first-seen order.
std::vector<std::string> referenced_variables(const Expr& e);

/// True if any node satisfies `is_nonsmooth`.
bool contains_nonsmooth(const Expr& e);

}  // namespace declsolve
