#include "declsolve/diff.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace declsolve {
namespace {

using namespace build;

class Reverse {
 public:
  explicit Reverse(const std::vector<DiffVariable>& vars) {
    for (const auto& v : vars) targets_.insert(v.name);
  }

  GradientSet run(const Expr& root, const Expr& seed, const std::vector<DiffVariable>& vars) {
    order(root);
    if (depends(root)) adjoint_[root.get()] = seed;
    for (auto it = topo_.rbegin(); it != topo_.rend(); ++it) {
      const ExprNode* n = *it;
      auto a = adjoint_.find(n);
      if (a == adjoint_.end()) continue;
      propagate(*n, a->second);
    }
    GradientSet out;
    for (const auto& v : vars) {
      auto it = var_adjoint_.find(v.name);
      out[v.name] = it == var_adjoint_.end() ? zero(v.shape) : it->second;
    }
    return out;
  }

 private:
  void order(const Expr& e) {
    if (!visited_.insert(e.get()).second) return;
    for (const Expr& c : e->children) order(c);
    nodes_[e.get()] = e;
    topo_.push_back(e.get());
  }

  bool depends(const Expr& e) {
    if (auto it = depends_.find(e.get()); it != depends_.end()) return it->second;
    bool d = e->op == Op::kVariable && targets_.count(e->name) != 0;
    for (const Expr& c : e->children) d = depends(c) || d;
    depends_[e.get()] = d;
    return d;
  }

  void accumulate(const Expr& child, const Expr& contribution) {
    if (!depends(child)) return;
    if (child->op == Op::kVariable) {
      auto [it, fresh] = var_adjoint_.emplace(child->name, contribution);
      if (!fresh) it->second = add(it->second, contribution);
      return;
    }
    auto [it, fresh] = adjoint_.emplace(child.get(), contribution);
    if (!fresh) it->second = add(it->second, contribution);
  }

  static Expr one() { return constant(1.0); }

  void propagate(const ExprNode& n, const Expr& g) {
    if (n.children.empty()) return;
    const Expr self = nodes_.at(&n);
    const Expr& a = n.children[0];
    const Expr b = n.children.size() > 1 ? n.children[1] : nullptr;
    switch (n.op) {
      case Op::kAdd:
        accumulate(a, g);
        accumulate(b, g);
        return;
      case Op::kSub:
        accumulate(a, g);
        if (depends(b)) accumulate(b, neg(g));
        return;
      case Op::kNeg: accumulate(a, neg(g)); return;
      case Op::kMul:
        if (a->shape.is_scalar() && !b->shape.is_scalar()) {
          if (depends(a)) accumulate(a, inner(g, b));
          if (depends(b)) accumulate(b, mul(a, g));
        } else if (b->shape.is_scalar() && !a->shape.is_scalar()) {
          if (depends(a)) accumulate(a, mul(g, b));
          if (depends(b)) accumulate(b, inner(g, a));
        } else if (a->shape.is_scalar() && b->shape.is_scalar()) {
          if (depends(a)) accumulate(a, mul(g, b));
          if (depends(b)) accumulate(b, mul(a, g));
        } else {
          if (depends(a)) accumulate(a, mul(g, transpose(b)));
          if (depends(b)) accumulate(b, mul(transpose(a), g));
        }
        return;
      case Op::kDiv:
        if (depends(a)) accumulate(a, div(g, b));
        if (depends(b)) accumulate(b, neg(div(inner(g, self), b)));
        return;
      case Op::kEMul:
        if (depends(a)) accumulate(a, emul(g, b));
        if (depends(b)) accumulate(b, emul(g, a));
        return;
      case Op::kEDiv:
        if (depends(a)) accumulate(a, ediv(g, b));
        if (depends(b)) accumulate(b, neg(ediv(emul(g, self), b)));
        return;
      case Op::kPow:
      case Op::kEPow: power(n, self, g); return;
      case Op::kLog: accumulate(a, ediv(g, a)); return;
      case Op::kExp: accumulate(a, emul(g, self)); return;
      case Op::kSin: accumulate(a, emul(g, unary(Op::kCos, a))); return;
      case Op::kCos: accumulate(a, neg(emul(g, unary(Op::kSin, a)))); return;
      case Op::kTanh: {
        const Expr sq = emul(self, self);
        accumulate(a, sub(g, emul(g, sq)));
        return;
      }
      case Op::kNorm2: accumulate(a, mul(div(g, self), a)); return;
      case Op::kSum: accumulate(a, broadcast(g, a->shape)); return;
      case Op::kTrace: accumulate(a, mul(g, identity(a->shape.rows()))); return;
      case Op::kDet: accumulate(a, mul(mul(g, self), transpose(inv(a)))); return;
      case Op::kInv: {
        const Expr yt = transpose(self);
        accumulate(a, neg(mul(mul(yt, g), yt)));
        return;
      }
      case Op::kTranspose: accumulate(a, transpose(g)); return;
      case Op::kBroadcast: accumulate(a, sum(g)); return;
      case Op::kAbs:
      case Op::kNorm1:
        throw Error(ErrorKind::kNonSmoothNode,
                    "cannot differentiate '" + std::string(op_name(n.op)) + "' in '" +
                        to_string(self) + "'; it must be reformulated first",
                    n.span);
      default: return;
    }
  }

  void power(const ExprNode& n, const Expr& self, const Expr& g) {
    const Expr& base = n.children[0];
    const Expr& p = n.children[1];
    if (depends(base)) {
      if (base->op == Op::kNorm2 && is_constant(p, 2.0)) {
        // d |e|^2 = 2 e, without the division through |e|
        const Expr& e = base->children[0];
        if (depends(e)) accumulate(e, mul(mul(constant(2.0), g), e));
      } else if (is_constant(p, 2.0)) {
        accumulate(base, emul(g, mul(constant(2.0), base)));
      } else {
        const Expr pm1 = sub(p, constant(1.0));
        const Expr d = n.op == Op::kPow ? pow(base, pm1) : epow(base, pm1);
        accumulate(base, emul(g, mul(p, d)));
      }
    }
    if (depends(p)) accumulate(p, inner(g, emul(self, unary(Op::kLog, base))));
  }

  std::set<std::string> targets_;
  std::unordered_set<const ExprNode*> visited_;
  std::vector<const ExprNode*> topo_;
  std::unordered_map<const ExprNode*, Expr> nodes_;
  std::unordered_map<const ExprNode*, bool> depends_;
  std::unordered_map<const ExprNode*, Expr> adjoint_;
  std::map<std::string, Expr> var_adjoint_;
};

void find_shapes(const Expr& e, std::map<std::string, Shape>& out) {
  if (e->op == Op::kVariable) out.emplace(e->name, e->shape);
  for (const Expr& c : e->children) find_shapes(c, out);
}

}  // namespace

GradientSet differentiate(const Expr& f, const std::vector<DiffVariable>& vars) {
  if (!f->shape.is_scalar()) {
    throw Error(ErrorKind::kNonScalarSource,
                "cannot take the gradient of non-Scalar '" + to_string(f) + "' (shape " +
                    to_string(f->shape) + ")",
                f->span);
  }
  return Reverse(vars).run(f, constant(1.0), vars);
}

GradientSet differentiate(const Expr& f, const std::vector<std::string>& vars) {
  std::map<std::string, Shape> shapes;
  find_shapes(f, shapes);
  std::vector<DiffVariable> dv;
  for (const auto& name : vars) {
    auto it = shapes.find(name);
    if (it == shapes.end()) {
      throw Error(ErrorKind::kUnknownName, "variable '" + name + "' does not occur in '" +
                                               to_string(f) + "'; give its shape explicitly");
    }
    dv.push_back({name, it->second});
  }
  return differentiate(f, dv);
}

GradientSet differentiate_seeded(const Expr& f, const Expr& seed,
                                 const std::vector<DiffVariable>& vars) {
  if (seed->shape != f->shape) {
    throw Error(ErrorKind::kShapeMismatch, "seed shape " + to_string(seed->shape) +
                                               " differs from " + to_string(f->shape));
  }
  return Reverse(vars).run(f, seed, vars);
}

double check_gradient(const Expr& f, const GradientSet& grads, const Env& env, double eps) {
  auto value_at = [&](const Env& e) {
    Evaluator session(e);
    const double v = session.value(f).value();
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::kNumeric, "objective is not finite near the probe point", f->span);
    }
    return v;
  };
  double worst = 0.0;
  for (const auto& [name, gexpr] : grads) {
    const Dense g = eval(gexpr, env);
    const Dense& x = env.at(name);
    if (g.size() != x.size()) {
      throw Error(ErrorKind::kDimension, "gradient of '" + name + "' has " +
                                             std::to_string(g.size()) + " entries, variable has " +
                                             std::to_string(x.size()));
    }
    Dense fd(x.rows(), x.cols());
    Env probe = env;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double h = eps * (1.0 + std::fabs(x[i]));
      Dense xp = x;
      xp[i] = x[i] + h;
      probe.set(name, xp);
      const double fp = value_at(probe);
      xp[i] = x[i] - h;
      probe.set(name, xp);
      const double fm = value_at(probe);
      // the actual spacing, which can differ from 2h by rounding
      fd[i] = (fp - fm) / ((x[i] + h) - (x[i] - h));
    }
    probe.set(name, x);
    double scale = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      scale = std::max({scale, std::fabs(g[i]), std::fabs(fd[i])});
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      worst = std::max(worst, std::fabs(fd[i] - g[i]) / scale);
    }
  }
  return worst;
}

}  // namespace declsolve
