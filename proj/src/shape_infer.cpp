#include "declsolve/shape_infer.hpp"

#include <unordered_map>

namespace declsolve {
namespace {

std::string where_text(const ExprNode& n) {
  std::string s = "'";
  s += n.op == Op::kParameter || n.op == Op::kVariable ? n.name : std::string(op_name(n.op));
  s += "' at line " + std::to_string(n.span.line) + ", column " + std::to_string(n.span.column);
  return s;
}

[[noreturn]] void shape_error(const ExprNode& n, const std::string& detail) {
  throw Error(ErrorKind::kShapeMismatch, "shape mismatch in " + where_text(n) + ": " + detail,
              n.span);
}

}  // namespace

Dim ShapeInference::fresh(bool anchored) {
  const int id = static_cast<int>(parent_.size());
  parent_.push_back(id);
  size_.push_back(-1);
  anchored_.push_back(anchored);
  return Dim::symbol(id);
}

int ShapeInference::find(int id) {
  while (static_cast<int>(parent_.size()) <= id) fresh(true);
  int root = id;
  while (parent_[root] != root) root = parent_[root];
  while (parent_[id] != root) {
    const int next = parent_[id];
    parent_[id] = root;
    id = next;
  }
  return root;
}

Dim ShapeInference::canonical(Dim d) {
  if (d.is_fixed()) return d;
  const int r = find(d.id());
  if (size_[r] >= 0) return Dim::fixed(static_cast<std::size_t>(size_[r]));
  return Dim::symbol(r);
}

Shape ShapeInference::canonical(const Shape& s) {
  if (!s.is_matrix()) return s;
  return Shape::matrix(canonical(s.rows()), canonical(s.cols()));
}

void ShapeInference::unify(Dim a, Dim b, const ExprNode& where) {
  a = canonical(a);
  b = canonical(b);
  if (a == b) return;
  if (a.is_fixed() && b.is_fixed()) {
    shape_error(where, "dimension " + std::to_string(a.size()) + " conflicts with " +
                           std::to_string(b.size()));
  }
  if (a.is_fixed()) std::swap(a, b);
  // a is symbolic here
  const int ra = find(a.id());
  if (b.is_fixed()) {
    size_[ra] = static_cast<long long>(b.size());
    return;
  }
  const int rb = find(b.id());
  parent_[ra] = rb;
  anchored_[rb] = anchored_[rb] || anchored_[ra];
}

Shape ShapeInference::annotate_op(const ExprNode& n, const std::vector<Expr>& kids) {
  auto same = [&](const Shape& a, const Shape& b) -> Shape {
    if (a.is_scalar() && b.is_scalar()) return a;
    if (a.is_scalar() != b.is_scalar()) {
      shape_error(n, to_string(canonical(a)) + " vs " + to_string(canonical(b)) +
                         " (use vector(...) to broadcast a scalar)");
    }
    unify(a.rows(), b.rows(), n);
    unify(a.cols(), b.cols(), n);
    return canonical(a);
  };
  auto square = [&](const Shape& a) {
    if (a.is_matrix()) unify(a.rows(), a.cols(), n);
    return canonical(a);
  };

  switch (n.op) {
    case Op::kAdd:
    case Op::kSub:
    case Op::kEMul:
    case Op::kEDiv: return same(kids[0]->shape, kids[1]->shape);
    case Op::kMul: {
      const Shape& a = kids[0]->shape;
      const Shape& b = kids[1]->shape;
      if (a.is_scalar()) return b;
      if (b.is_scalar()) return a;
      unify(a.cols(), b.rows(), n);
      return canonical(Shape::matrix(a.rows(), b.cols()));
    }
    case Op::kDiv:
      if (!kids[1]->shape.is_scalar()) {
        shape_error(n, "divisor is " + to_string(canonical(kids[1]->shape)) +
                           "; '/' needs a Scalar divisor (use ./ for elementwise division)");
      }
      return kids[0]->shape;
    case Op::kPow:
      if (!kids[0]->shape.is_scalar()) {
        shape_error(n, "matrix power is not supported; use .^ for elementwise powers");
      }
      [[fallthrough]];
    case Op::kEPow:
      if (!kids[1]->shape.is_scalar()) {
        shape_error(n, "exponent must be Scalar, got " + to_string(canonical(kids[1]->shape)));
      }
      return kids[0]->shape;
    case Op::kLog:
    case Op::kExp:
    case Op::kSin:
    case Op::kCos:
    case Op::kTanh:
    case Op::kAbs:
    case Op::kNeg: return kids[0]->shape;
    case Op::kNorm1:
    case Op::kNorm2:
    case Op::kSum: return Shape::scalar();
    case Op::kTrace:
    case Op::kDet: square(kids[0]->shape); return Shape::scalar();
    case Op::kInv: return square(kids[0]->shape);
    case Op::kTranspose: return kids[0]->shape.transposed();
    case Op::kBroadcast: {
      if (!kids[0]->shape.is_scalar()) {
        shape_error(n, "vector(...) takes a Scalar, got " + to_string(canonical(kids[0]->shape)));
      }
      const Dim d = fresh(false);
      broadcasts_.emplace_back(d.id(), n.span);
      return Shape::vector(d);
    }
    case Op::kConstant: return Shape::scalar();
    case Op::kIdentity: return n.shape;
    case Op::kParameter:
    case Op::kVariable: break;
  }
  return n.shape;
}

Expr ShapeInference::annotate(const Expr& raw, const std::vector<Declaration>& decls) {
  if (raw->op == Op::kParameter || raw->op == Op::kVariable) {
    for (const Declaration& d : decls) {
      if (d.name != raw->name) continue;
      auto n = std::make_shared<ExprNode>(*raw);
      n->op = d.role == Role::kVariable ? Op::kVariable : Op::kParameter;
      n->shape = d.shape;
      n->symmetric = d.symmetric;
      return n;
    }
    throw Error(ErrorKind::kUnknownName,
                "unknown name '" + raw->name + "' at line " + std::to_string(raw->span.line) +
                    ", column " + std::to_string(raw->span.column),
                raw->span);
  }
  std::vector<Expr> kids;
  kids.reserve(raw->children.size());
  for (const Expr& c : raw->children) kids.push_back(annotate(c, decls));
  const Shape s = annotate_op(*raw, kids);
  return with_shape(raw, s, std::move(kids));
}

Expr ShapeInference::finish(const Expr& e) {
  std::unordered_map<const ExprNode*, Expr> memo;
  auto rec = [&](auto&& self, const Expr& n) -> Expr {
    if (auto it = memo.find(n.get()); it != memo.end()) return it->second;
    std::vector<Expr> kids;
    kids.reserve(n->children.size());
    for (const Expr& c : n->children) kids.push_back(self(self, c));
    Expr out = with_shape(n, canonical(n->shape), std::move(kids));
    memo.emplace(n.get(), out);
    return out;
  };
  return rec(rec, e);
}

void ShapeInference::check_broadcasts() {
  for (const auto& [id, span] : broadcasts_) {
    const int r = find(id);
    if (size_[r] < 0 && !anchored_[r]) {
      throw Error(ErrorKind::kShapeMismatch,
                  "cannot infer the length of vector(...) at line " + std::to_string(span.line) +
                      ", column " + std::to_string(span.column) +
                      ": its context does not fix a dimension",
                  span);
    }
  }
}

Expr infer_shape(const Expr& raw, const std::vector<Declaration>& decls) {
  ShapeInference inference;
  Expr annotated = inference.annotate(raw, decls);
  inference.check_broadcasts();
  return inference.finish(annotated);
}

}  // namespace declsolve
