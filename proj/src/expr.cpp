#include "declsolve/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <unordered_map>
#include <unordered_set>

namespace declsolve {

std::string_view op_name(Op op) {
  switch (op) {
    case Op::kAdd: return "+";
    case Op::kSub: return "-";
    case Op::kNeg: return "neg";
    case Op::kMul: return "*";
    case Op::kDiv: return "/";
    case Op::kEMul: return ".*";
    case Op::kEDiv: return "./";
    case Op::kPow: return "^";
    case Op::kEPow: return ".^";
    case Op::kLog: return "log";
    case Op::kExp: return "exp";
    case Op::kSin: return "sin";
    case Op::kCos: return "cos";
    case Op::kTanh: return "tanh";
    case Op::kAbs: return "abs";
    case Op::kNorm1: return "norm1";
    case Op::kNorm2: return "norm2";
    case Op::kSum: return "sum";
    case Op::kTrace: return "tr";
    case Op::kDet: return "det";
    case Op::kInv: return "inv";
    case Op::kTranspose: return "'";
    case Op::kBroadcast: return "vector";
    case Op::kIdentity: return "eye";
    case Op::kConstant: return "constant";
    case Op::kParameter: return "parameter";
    case Op::kVariable: return "variable";
  }
  return "?";
}

bool is_elementwise_unary(Op op) {
  switch (op) {
    case Op::kLog:
    case Op::kExp:
    case Op::kSin:
    case Op::kCos:
    case Op::kTanh:
    case Op::kAbs: return true;
    default: return false;
  }
}

bool is_leaf(Op op) {
  return op == Op::kConstant || op == Op::kParameter || op == Op::kVariable ||
         op == Op::kIdentity;
}

bool is_nonsmooth(Op op) { return op == Op::kAbs || op == Op::kNorm1; }

Expr make_node(Op op, std::vector<Expr> children, Span span) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->children = std::move(children);
  n->span = span;
  return n;
}

Expr make_constant(double value, Span span) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::kConstant;
  n->value = value;
  n->span = span;
  n->shape = Shape::scalar();
  return n;
}

Expr make_ref(Op op, std::string name, Span span) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->name = std::move(name);
  n->span = span;
  return n;
}

Expr with_shape(const Expr& e, Shape shape, std::vector<Expr> children) {
  auto n = std::make_shared<ExprNode>(*e);
  n->shape = shape;
  n->children = std::move(children);
  return n;
}

bool is_constant(const Expr& e, double v) { return e->op == Op::kConstant && e->value == v; }

bool is_zero(const Expr& e) {
  if (is_constant(e, 0.0)) return true;
  return e->op == Op::kBroadcast && is_constant(e->children[0], 0.0);
}

namespace build {
namespace {

[[noreturn]] void mismatch(std::string_view what, const Shape& a, const Shape& b) {
  throw Error(ErrorKind::kShapeMismatch, std::string(what) + ": incompatible shapes " +
                                             to_string(a) + " and " + to_string(b));
}

Expr node(Op op, Shape shape, std::vector<Expr> children) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->shape = shape;
  n->children = std::move(children);
  return n;
}

bool is_square(const Shape& s) { return s.is_scalar() || s.rows() == s.cols(); }

Shape same_shape(std::string_view what, const Shape& a, const Shape& b) {
  if (a != b) mismatch(what, a, b);
  return a;
}

}  // namespace

Expr constant(double v) { return make_constant(v); }

Expr parameter(std::string name, Shape shape, bool symmetric) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::kParameter;
  n->name = std::move(name);
  n->shape = shape;
  n->symmetric = symmetric;
  return n;
}

Expr variable(std::string name, Shape shape) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::kVariable;
  n->name = std::move(name);
  n->shape = shape;
  return n;
}

Expr zero(const Shape& shape) {
  if (shape.is_scalar()) return constant(0.0);
  return node(Op::kBroadcast, shape, {constant(0.0)});
}

Expr broadcast(const Expr& scalar, const Shape& shape) {
  if (!scalar->shape.is_scalar()) mismatch("broadcast", scalar->shape, Shape::scalar());
  if (shape.is_scalar()) return scalar;
  return node(Op::kBroadcast, shape, {scalar});
}

Expr identity(Dim n) {
  if (n == Dim::fixed(1)) return constant(1.0);
  return node(Op::kIdentity, Shape::matrix(n, n), {});
}

Expr add(const Expr& a, const Expr& b) {
  const Shape s = same_shape("+", a->shape, b->shape);
  if (is_zero(a)) return b;
  if (is_zero(b)) return a;
  if (a->op == Op::kConstant && b->op == Op::kConstant) return constant(a->value + b->value);
  if (a->op == Op::kBroadcast && b->op == Op::kBroadcast) {
    return broadcast(add(a->children[0], b->children[0]), s);
  }
  return node(Op::kAdd, s, {a, b});
}

Expr sub(const Expr& a, const Expr& b) {
  const Shape s = same_shape("-", a->shape, b->shape);
  if (is_zero(b)) return a;
  if (is_zero(a)) return neg(b);
  if (a->op == Op::kConstant && b->op == Op::kConstant) return constant(a->value - b->value);
  if (b->op == Op::kNeg) return add(a, b->children[0]);
  return node(Op::kSub, s, {a, b});
}

Expr neg(const Expr& a) {
  if (is_zero(a)) return a;
  if (a->op == Op::kConstant) return constant(-a->value);
  if (a->op == Op::kNeg) return a->children[0];
  if (a->op == Op::kBroadcast) return broadcast(neg(a->children[0]), a->shape);
  return node(Op::kNeg, a->shape, {a});
}

Expr mul(const Expr& a, const Expr& b) {
  Shape s;
  if (a->shape.is_scalar()) {
    s = b->shape;
  } else if (b->shape.is_scalar()) {
    s = a->shape;
  } else {
    if (a->shape.cols() != b->shape.rows()) mismatch("*", a->shape, b->shape);
    s = Shape::matrix(a->shape.rows(), b->shape.cols());
  }
  if (is_zero(a) || is_zero(b)) return zero(s);
  if (a->shape.is_scalar() && is_constant(a, 1.0)) return b;
  if (b->shape.is_scalar() && is_constant(b, 1.0)) return a;
  if (a->shape.is_scalar() && is_constant(a, -1.0)) return neg(b);
  if (b->shape.is_scalar() && is_constant(b, -1.0)) return neg(a);
  if (a->op == Op::kConstant && b->op == Op::kConstant) return constant(a->value * b->value);
  if (a->op == Op::kIdentity) return b;
  if (b->op == Op::kIdentity) return a;
  if (a->op == Op::kNeg) return neg(mul(a->children[0], b));
  if (b->op == Op::kNeg) return neg(mul(a, b->children[0]));
  if (a->shape.is_scalar() && b->op == Op::kBroadcast) {
    return broadcast(mul(a, b->children[0]), s);
  }
  if (b->shape.is_scalar() && a->op == Op::kBroadcast) {
    return broadcast(mul(a->children[0], b), s);
  }
  return node(Op::kMul, s, {a, b});
}

Expr div(const Expr& a, const Expr& b) {
  if (!b->shape.is_scalar()) mismatch("/", a->shape, b->shape);
  if (is_zero(a)) return a;
  if (is_constant(b, 1.0)) return a;
  if (a->op == Op::kConstant && b->op == Op::kConstant) return constant(a->value / b->value);
  return node(Op::kDiv, a->shape, {a, b});
}

Expr emul(const Expr& a, const Expr& b) {
  const Shape s = same_shape(".*", a->shape, b->shape);
  if (s.is_scalar()) return mul(a, b);
  if (is_zero(a) || is_zero(b)) return zero(s);
  if (a->op == Op::kBroadcast) return mul(a->children[0], b);
  if (b->op == Op::kBroadcast) return mul(a, b->children[0]);
  return node(Op::kEMul, s, {a, b});
}

Expr ediv(const Expr& a, const Expr& b) {
  const Shape s = same_shape("./", a->shape, b->shape);
  if (s.is_scalar()) return div(a, b);
  if (is_zero(a)) return a;
  if (b->op == Op::kBroadcast) return div(a, b->children[0]);
  return node(Op::kEDiv, s, {a, b});
}

Expr pow(const Expr& base, const Expr& exponent) {
  if (!base->shape.is_scalar()) mismatch("^ (base must be Scalar)", base->shape, Shape::scalar());
  if (!exponent->shape.is_scalar()) mismatch("^ exponent", exponent->shape, Shape::scalar());
  if (is_constant(exponent, 1.0)) return base;
  if (is_constant(exponent, 0.0)) return constant(1.0);
  if (base->op == Op::kConstant && exponent->op == Op::kConstant) {
    return constant(std::pow(base->value, exponent->value));
  }
  return node(Op::kPow, base->shape, {base, exponent});
}

Expr epow(const Expr& base, const Expr& exponent) {
  if (!exponent->shape.is_scalar()) mismatch(".^ exponent", exponent->shape, Shape::scalar());
  if (is_constant(exponent, 1.0)) return base;
  if (is_constant(exponent, 0.0)) return broadcast(constant(1.0), base->shape);
  if (base->op == Op::kConstant && exponent->op == Op::kConstant) {
    return constant(std::pow(base->value, exponent->value));
  }
  return node(Op::kEPow, base->shape, {base, exponent});
}

Expr unary(Op op, const Expr& a) {
  switch (op) {
    case Op::kNeg: return neg(a);
    case Op::kTranspose: return transpose(a);
    case Op::kSum: return sum(a);
    case Op::kNorm2: return norm2(a);
    case Op::kTrace: return trace(a);
    case Op::kDet: return det(a);
    case Op::kInv: return inv(a);
    case Op::kNorm1: return node(Op::kNorm1, Shape::scalar(), {a});
    default: break;
  }
  if (!is_elementwise_unary(op)) {
    throw Error(ErrorKind::kShapeMismatch, "not a unary operator: " + std::string(op_name(op)));
  }
  if (a->op == Op::kConstant) {
    const double v = a->value;
    switch (op) {
      case Op::kLog: return constant(std::log(v));
      case Op::kExp: return constant(std::exp(v));
      case Op::kSin: return constant(std::sin(v));
      case Op::kCos: return constant(std::cos(v));
      case Op::kTanh: return constant(std::tanh(v));
      case Op::kAbs: return constant(std::fabs(v));
      default: break;
    }
  }
  return node(op, a->shape, {a});
}

Expr transpose(const Expr& a) {
  if (a->shape.is_scalar()) return a;
  if (a->op == Op::kTranspose) return a->children[0];
  if (a->op == Op::kParameter && a->symmetric) return a;
  if (a->op == Op::kIdentity) return a;
  if (a->op == Op::kBroadcast) return broadcast(a->children[0], a->shape.transposed());
  if (a->op == Op::kNeg) return neg(transpose(a->children[0]));
  return node(Op::kTranspose, a->shape.transposed(), {a});
}

Expr sum(const Expr& a) {
  if (a->shape.is_scalar()) return a;
  if (is_zero(a)) return constant(0.0);
  return node(Op::kSum, Shape::scalar(), {a});
}

Expr norm2(const Expr& a) { return node(Op::kNorm2, Shape::scalar(), {a}); }

Expr trace(const Expr& a) {
  if (!is_square(a->shape)) mismatch("tr (square argument)", a->shape, a->shape.transposed());
  if (a->shape.is_scalar()) return a;
  return node(Op::kTrace, Shape::scalar(), {a});
}

Expr det(const Expr& a) {
  if (!is_square(a->shape)) mismatch("det (square argument)", a->shape, a->shape.transposed());
  if (a->shape.is_scalar()) return a;
  return node(Op::kDet, Shape::scalar(), {a});
}

Expr inv(const Expr& a) {
  if (!is_square(a->shape)) mismatch("inv (square argument)", a->shape, a->shape.transposed());
  if (a->shape.is_scalar()) return div(constant(1.0), a);
  return node(Op::kInv, a->shape, {a});
}

Expr inner(const Expr& a, const Expr& b) {
  same_shape("inner product", a->shape, b->shape);
  if (a->shape.is_scalar()) return mul(a, b);
  if (a->op == Op::kBroadcast) return mul(a->children[0], sum(b));
  if (b->op == Op::kBroadcast) return mul(sum(a), b->children[0]);
  return sum(emul(a, b));
}

Expr apply(Op op, const std::vector<Expr>& c) {
  switch (op) {
    case Op::kAdd: return add(c.at(0), c.at(1));
    case Op::kSub: return sub(c.at(0), c.at(1));
    case Op::kMul: return mul(c.at(0), c.at(1));
    case Op::kDiv: return div(c.at(0), c.at(1));
    case Op::kEMul: return emul(c.at(0), c.at(1));
    case Op::kEDiv: return ediv(c.at(0), c.at(1));
    case Op::kPow: return pow(c.at(0), c.at(1));
    case Op::kEPow: return epow(c.at(0), c.at(1));
    default: return unary(op, c.at(0));
  }
}

}  // namespace build

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a == b) return true;
  if (a->op != b->op || a->shape != b->shape || a->name != b->name ||
      a->symmetric != b->symmetric || a->children.size() != b->children.size()) {
    return false;
  }
  if (a->op == Op::kConstant && std::memcmp(&a->value, &b->value, sizeof(double)) != 0) {
    return false;
  }
  for (std::size_t i = 0; i < a->children.size(); ++i) {
    if (!structurally_equal(a->children[i], b->children[i])) return false;
  }
  return true;
}

struct Interner::Impl {
  std::unordered_map<std::string, Expr> table;
  std::unordered_map<const ExprNode*, Expr> done;
  std::vector<Expr> keep;  // inputs stay alive so their addresses are not reused
};

namespace {

std::string dim_key(const Dim& d) {
  return d.is_fixed() ? "f" + std::to_string(d.size()) : "s" + std::to_string(d.id());
}

}  // namespace

Expr Interner::intern(const Expr& e) {
  if (!impl_) impl_ = std::make_shared<Impl>();
  if (auto it = impl_->done.find(e.get()); it != impl_->done.end()) return it->second;
  std::vector<Expr> kids;
  kids.reserve(e->children.size());
  std::string key;
  key += std::to_string(static_cast<int>(e->op));
  key += '|';
  key += std::to_string(static_cast<int>(e->shape.kind()));
  key += dim_key(e->shape.rows());
  key += dim_key(e->shape.cols());
  key += '|';
  key += e->name;
  key += e->symmetric ? "|s|" : "|n|";
  if (e->op == Op::kConstant) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &e->value, sizeof bits);
    key += std::to_string(bits);
  }
  bool changed = false;
  for (const Expr& c : e->children) {
    Expr ic = intern(c);
    changed = changed || ic != c;
    key += '|';
    key += std::to_string(reinterpret_cast<std::uintptr_t>(ic.get()));
    kids.push_back(std::move(ic));
  }
  Expr result;
  if (auto it = impl_->table.find(key); it != impl_->table.end()) {
    result = it->second;
  } else {
    result = changed ? with_shape(e, e->shape, std::move(kids)) : e;
    impl_->table.emplace(std::move(key), result);
  }
  impl_->done.emplace(e.get(), result);
  impl_->done.emplace(result.get(), result);
  impl_->keep.push_back(e);
  return result;
}

namespace {

int precedence(const Expr& e) {
  switch (e->op) {
    case Op::kAdd:
    case Op::kSub: return 1;
    case Op::kMul:
    case Op::kDiv:
    case Op::kEMul:
    case Op::kEDiv: return 2;
    case Op::kNeg: return 3;
    case Op::kPow:
    case Op::kEPow: return 4;
    case Op::kTranspose: return 5;
    case Op::kConstant: return e->value < 0 || std::signbit(e->value) ? 3 : 6;
    default: return 6;
  }
}

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void render(const Expr& e, std::string& out);

void render_child(const Expr& c, bool parens, std::string& out) {
  if (parens) out += '(';
  render(c, out);
  if (parens) out += ')';
}

void render(const Expr& e, std::string& out) {
  const int p = precedence(e);
  switch (e->op) {
    case Op::kAdd:
    case Op::kSub:
    case Op::kMul:
    case Op::kDiv:
    case Op::kEMul:
    case Op::kEDiv:
      render_child(e->children[0], precedence(e->children[0]) < p, out);
      out += ' ';
      out += op_name(e->op);
      out += ' ';
      render_child(e->children[1], precedence(e->children[1]) <= p, out);
      return;
    case Op::kPow:
    case Op::kEPow:
      render_child(e->children[0], precedence(e->children[0]) <= p, out);
      out += op_name(e->op);
      render_child(e->children[1], precedence(e->children[1]) < 5, out);
      return;
    case Op::kNeg:
      out += '-';
      render_child(e->children[0], precedence(e->children[0]) < p, out);
      return;
    case Op::kTranspose:
      render_child(e->children[0], precedence(e->children[0]) < p, out);
      out += '\'';
      return;
    case Op::kConstant: out += format_number(e->value); return;
    case Op::kParameter:
    case Op::kVariable: out += e->name; return;
    case Op::kIdentity: out += "eye(" + to_string(e->shape.rows()) + ")"; return;
    case Op::kBroadcast:
      out += e->shape.is_column() || !e->shape.known() ? "vector(" : "matrix(";
      render(e->children[0], out);
      out += ')';
      return;
    default:
      out += op_name(e->op);
      out += '(';
      render(e->children[0], out);
      out += ')';
      return;
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  render(e, out);
  return out;
}

std::size_t count_nodes(const std::vector<Expr>& roots) {
  std::unordered_set<const ExprNode*> seen;
  std::vector<const ExprNode*> stack;
  for (const Expr& r : roots) stack.push_back(r.get());
  while (!stack.empty()) {
    const ExprNode* n = stack.back();
    stack.pop_back();
    if (!seen.insert(n).second) continue;
    for (const Expr& c : n->children) stack.push_back(c.get());
  }
  return seen.size();
}

std::vector<std::string> referenced_variables(const Expr& e) {
  std::vector<std::string> out;
  std::unordered_set<const ExprNode*> seen;
  std::function<void(const Expr&)> walk = [&](const Expr& n) {
    if (!seen.insert(n.get()).second) return;
    if (n->op == Op::kVariable) {
      if (std::find(out.begin(), out.end(), n->name) == out.end()) out.push_back(n->name);
    }
    for (const Expr& c : n->children) walk(c);
  };
  walk(e);
  return out;
}

bool contains_nonsmooth(const Expr& e) {
  if (is_nonsmooth(e->op)) return true;
  for (const Expr& c : e->children) {
    if (contains_nonsmooth(c)) return true;
  }
  return false;
}

}  // namespace declsolve
