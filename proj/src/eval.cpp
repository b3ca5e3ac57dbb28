#include "declsolve/eval.hpp"

#include <cmath>

namespace declsolve {

void Env::set(const std::string& name, Dense value) { values_[name] = std::move(value); }

const Dense* Env::find(const std::string& name) const {
  auto it = values_.find(name);
  return it == values_.end() ? nullptr : &it->second;
}

const Dense& Env::at(const std::string& name) const {
  if (const Dense* v = find(name)) return *v;
  throw Error(ErrorKind::kUnknownName, "no value bound for '" + name + "'");
}

void Env::set_symmetric(const std::string& name, bool symmetric) { symmetric_[name] = symmetric; }

bool Env::symmetric(const std::string& name) const {
  auto it = symmetric_.find(name);
  return it != symmetric_.end() && it->second;
}

Evaluator::Evaluator(const Env& env, const kernels::Table& table)
    : env_(env), table_(table), dims_(env.dims) {}

void Evaluator::bind(const std::string& name, Dense v) { overlay_[name] = std::move(v); }

const Dense& Evaluator::lookup(const ExprNode& n) {
  if (auto it = overlay_.find(n.name); it != overlay_.end()) return it->second;
  if (const Dense* v = env_.find(n.name)) return *v;
  throw Error(ErrorKind::kUnknownName, "no value bound for '" + n.name + "'");
}

std::size_t Evaluator::resolve(const Dim& d, const ExprNode& n) const {
  if (auto s = dims_.resolve(d)) return *s;
  throw Error(ErrorKind::kDimension,
              "size of " + to_string(d) + " in '" + std::string(op_name(n.op)) +
                  "' is not determined by the bound data");
}

void Evaluator::bind_dims(const Expr& e) {
  if (!dims_seen_.emplace(e.get(), true).second) return;
  if (e->op == Op::kParameter || e->op == Op::kVariable) {
    const Dense& v = lookup(*e);
    const Shape& s = e->shape;
    const std::string ctx = "'" + e->name + "'";
    if (s.is_scalar()) {
      if (v.rows() != 1 || v.cols() != 1) {
        throw Error(ErrorKind::kDimension, ctx + " is Scalar but bound value is " +
                                               std::to_string(v.rows()) + "x" +
                                               std::to_string(v.cols()));
      }
    } else if (s.is_matrix()) {
      dims_.bind(s.rows(), v.rows(), ctx);
      dims_.bind(s.cols(), v.cols(), ctx);
    }
    return;
  }
  for (const Expr& c : e->children) bind_dims(c);
}

const Dense& Evaluator::value(const Expr& e) {
  if (auto it = cache_.find(e.get()); it != cache_.end()) return *it->second;
  bind_dims(e);
  if (e->op == Op::kParameter || e->op == Op::kVariable) return lookup(*e);
  // Children first, except transposes feeding a product: those are fused into
  // the GEMM call and never materialized unless something else needs them.
  for (const Expr& c : e->children) {
    if (e->op == Op::kMul && c->op == Op::kTranspose && !c->shape.is_scalar()) {
      value(c->children[0]);
    } else {
      value(c);
    }
  }
  auto out = std::make_unique<Dense>(compute(*e));
  ++evaluated_;
  const Dense& ref = *out;
  cache_.emplace(e.get(), std::move(out));
  return ref;
}

namespace {

template <class F>
Dense map_unary(const Dense& a, F f) {
  Dense out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return out;
}

void require_same(const Dense& a, const Dense& b, const ExprNode& n) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::kDimension,
                "operands of '" + std::string(op_name(n.op)) + "' have extents " +
                    std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " and " +
                    std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

}  // namespace

Dense Evaluator::matmul(const ExprNode& n) {
  const Expr& lhs = n.children[0];
  const Expr& rhs = n.children[1];
  if (lhs->shape.is_scalar() || rhs->shape.is_scalar()) {
    const bool left_scalar = lhs->shape.is_scalar();
    const Dense& s = value(left_scalar ? lhs : rhs);
    const Dense& m = value(left_scalar ? rhs : lhs);
    Dense out(m.rows(), m.cols());
    table_.scale(s.value(), m.data(), out.data(), m.size());
    return out;
  }
  auto operand = [&](const Expr& c, bool& trans) -> const Dense& {
    if (c->op == Op::kTranspose && cache_.find(c.get()) == cache_.end()) {
      trans = true;
      return value(c->children[0]);
    }
    trans = false;
    return value(c);
  };
  bool ta = false;
  bool tb = false;
  const Dense& a = operand(lhs, ta);
  const Dense& b = operand(rhs, tb);
  const std::size_t m = ta ? a.cols() : a.rows();
  const std::size_t k = ta ? a.rows() : a.cols();
  const std::size_t kb = tb ? b.cols() : b.rows();
  const std::size_t nc = tb ? b.rows() : b.cols();
  if (k != kb) {
    throw Error(ErrorKind::kDimension, "matrix product of " + std::to_string(m) + "x" +
                                           std::to_string(k) + " and " + std::to_string(kb) +
                                           "x" + std::to_string(nc));
  }
  Dense out(m, nc);
  if (m == 1 && nc == 1) {
    out[0] = table_.dot(a.data(), b.data(), k);
  } else {
    kernels::gemm(table_, ta, tb, m, nc, k, a.data(), b.data(), out.data());
  }
  return out;
}

Dense Evaluator::compute(const ExprNode& n) {
  auto kid = [&](std::size_t i) -> const Dense& { return value(n.children[i]); };
  switch (n.op) {
    case Op::kConstant: return Dense::scalar(n.value);
    case Op::kParameter:
    case Op::kVariable: return lookup(n);
    case Op::kAdd:
    case Op::kSub:
    case Op::kEMul:
    case Op::kEDiv: {
      const Dense& a = kid(0);
      const Dense& b = kid(1);
      require_same(a, b, n);
      Dense out(a.rows(), a.cols());
      auto fn = n.op == Op::kAdd   ? table_.add
                : n.op == Op::kSub ? table_.sub
                : n.op == Op::kEMul ? table_.mul
                                    : table_.div;
      fn(a.data(), b.data(), out.data(), a.size());
      return out;
    }
    case Op::kNeg: {
      const Dense& a = kid(0);
      Dense out(a.rows(), a.cols());
      table_.scale(-1.0, a.data(), out.data(), a.size());
      return out;
    }
    case Op::kMul: return matmul(n);
    case Op::kDiv: {
      const double s = kid(1).value();
      return map_unary(kid(0), [s](double v) { return v / s; });
    }
    case Op::kPow:
    case Op::kEPow: {
      const Dense& a = kid(0);
      const double p = kid(1).value();
      if (p == 2.0) {
        Dense out(a.rows(), a.cols());
        table_.mul(a.data(), a.data(), out.data(), a.size());
        return out;
      }
      if (p == 1.0) return a;
      if (p == 0.5) return map_unary(a, [](double v) { return std::sqrt(v); });
      return map_unary(a, [p](double v) { return std::pow(v, p); });
    }
    case Op::kLog: return map_unary(kid(0), [](double v) { return std::log(v); });
    case Op::kExp: return map_unary(kid(0), [](double v) { return std::exp(v); });
    case Op::kSin: return map_unary(kid(0), [](double v) { return std::sin(v); });
    case Op::kCos: return map_unary(kid(0), [](double v) { return std::cos(v); });
    case Op::kTanh: return map_unary(kid(0), [](double v) { return std::tanh(v); });
    case Op::kAbs: return map_unary(kid(0), [](double v) { return std::fabs(v); });
    case Op::kNorm1: {
      const Dense& a = kid(0);
      return Dense::scalar(table_.asum(a.data(), a.size()));
    }
    case Op::kNorm2: {
      const Dense& a = kid(0);
      return Dense::scalar(std::sqrt(table_.sumsq(a.data(), a.size())));
    }
    case Op::kSum: {
      const Dense& a = kid(0);
      return Dense::scalar(table_.sum(a.data(), a.size()));
    }
    case Op::kTrace: {
      const Dense& a = kid(0);
      if (a.rows() != a.cols()) throw Error(ErrorKind::kDimension, "tr of non-square matrix");
      double s = 0.0;
      for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, i);
      return Dense::scalar(s);
    }
    case Op::kDet: {
      const Dense& a = kid(0);
      if (a.rows() != a.cols()) throw Error(ErrorKind::kDimension, "det of non-square matrix");
      return Dense::scalar(LuDecomposition(a).determinant());
    }
    case Op::kInv: {
      const Dense& a = kid(0);
      if (a.rows() != a.cols()) throw Error(ErrorKind::kDimension, "inv of non-square matrix");
      return LuDecomposition(a).inverse();
    }
    case Op::kTranspose: return kid(0).transposed();
    case Op::kBroadcast: {
      const double s = kid(0).value();
      if (n.shape.is_scalar()) return Dense::scalar(s);
      return Dense(resolve(n.shape.rows(), n), resolve(n.shape.cols(), n), s);
    }
    case Op::kIdentity: return Dense::identity(resolve(n.shape.rows(), n));
  }
  throw Error(ErrorKind::kNumeric, "unsupported operator");
}

Dense eval(const Expr& e, const Env& env) {
  Evaluator session(env);
  Dense out = session.value(e);
  if (!out.all_finite()) {
    throw Error(ErrorKind::kNumeric, "non-finite result evaluating '" + to_string(e) + "'",
                e->span);
  }
  return out;
}

std::vector<Dense> eval_batch(const Expr& e, const Env& env, const std::vector<Expr>& also) {
  Evaluator session(env);
  std::vector<Dense> out;
  out.reserve(also.size() + 1);
  out.push_back(session.value(e));
  for (const Expr& x : also) out.push_back(session.value(x));
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!out[i].all_finite()) {
      const Expr& which = i == 0 ? e : also[i - 1];
      throw Error(ErrorKind::kNumeric, "non-finite result evaluating '" + to_string(which) + "'",
                  which->span);
    }
  }
  return out;
}

}  // namespace declsolve
