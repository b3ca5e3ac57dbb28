#include "declsolve/reformulate.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace declsolve {

// ---------------------------------------------------------------- desmooth

namespace {

std::string at_text(const Span& s) {
  return " at line " + std::to_string(s.line) + ", column " + std::to_string(s.column);
}

bool has_variable(const Expr& e) {
  if (e->op == Op::kVariable) return true;
  return std::any_of(e->children.begin(), e->children.end(), has_variable);
}

class Desmoother {
 public:
  explicit Desmoother(ProblemSpec& out) : out_(out) {}

  Expr rewrite(const Expr& e, int polarity) {
    if (!contains_nonsmooth(e)) return e;
    switch (e->op) {
      case Op::kNorm1:
      case Op::kAbs: return epigraph(e, polarity);
      case Op::kAdd:
        return rebuild(e, {rewrite(e->children[0], polarity), rewrite(e->children[1], polarity)});
      case Op::kSub:
        return rebuild(e, {rewrite(e->children[0], polarity), rewrite(e->children[1], -polarity)});
      case Op::kNeg: return rebuild(e, {rewrite(e->children[0], -polarity)});
      case Op::kSum: return rebuild(e, {rewrite(e->children[0], polarity)});
      case Op::kMul: {
        const Expr& a = e->children[0];
        const Expr& b = e->children[1];
        if (a->shape.is_scalar() && !contains_nonsmooth(a)) {
          if (const int s = sign_of(a, false); s != 0) return rebuild(e, {a, rewrite(b, polarity * s)});
        }
        if (b->shape.is_scalar() && !contains_nonsmooth(b)) {
          if (const int s = sign_of(b, false); s != 0) return rebuild(e, {rewrite(a, polarity * s), b});
        }
        break;
      }
      case Op::kDiv: {
        const Expr& b = e->children[1];
        if (!contains_nonsmooth(b)) {
          if (const int s = sign_of(b, true); s != 0) {
            return rebuild(e, {rewrite(e->children[0], polarity * s), b});
          }
        }
        break;
      }
      default: break;
    }
    throw Error(ErrorKind::kNonConvexNonSmooth,
                "non-smooth term inside '" + std::string(op_name(e->op)) + "'" + at_text(e->span) +
                    " cannot be rewritten: only sums, negations, sum(...) and scaling by a "
                    "nonnegative Scalar may enclose norm1/abs",
                e->span);
  }

 private:
  static Expr rebuild(const Expr& e, std::vector<Expr> kids) {
    return with_shape(e, e->shape, std::move(kids));
  }

  // Sign of a scalar factor: +1, -1, or 0 if it cannot be decided from the
  // model text. Scalar parameters are assumed nonnegative (positive when
  // `strict`), which compile verifies against the bound data.
  int sign_of(const Expr& e, bool strict) {
    if (has_variable(e)) return 0;
    switch (e->op) {
      case Op::kConstant:
        if (e->value > 0.0) return 1;
        if (e->value < 0.0) return -1;
        return strict ? 0 : 1;
      case Op::kParameter:
        if (!e->shape.is_scalar()) return 0;
        pending_.push_back({e->name, strict, e->span});
        return 1;
      case Op::kNeg: return -sign_of(e->children[0], strict);
      case Op::kMul: return sign_of(e->children[0], strict) * sign_of(e->children[1], strict);
      case Op::kDiv: return sign_of(e->children[0], strict) * sign_of(e->children[1], true);
      case Op::kExp: return 1;
      default: return 0;
    }
  }

  Expr epigraph(const Expr& e, int polarity) {
    const Expr& inner = e->children[0];
    if (polarity <= 0) {
      const std::string why = polarity == 0 ? "inside an equality constraint"
                                            : "where it is maximized (or on the wrong side of "
                                              "an inequality)";
      throw Error(ErrorKind::kNonConvexNonSmooth,
                  "'" + std::string(op_name(e->op)) + "'" + at_text(e->span) + " appears " + why +
                      "; its epigraph rewrite would change the problem",
                  e->span);
    }
    if (contains_nonsmooth(inner)) {
      throw Error(ErrorKind::kNonConvexNonSmooth,
                  "nested non-smooth term inside '" + std::string(op_name(e->op)) + "'" +
                      at_text(e->span),
                  e->span);
    }
    // Sign requirements collected while deciding the polarity hold now.
    for (auto& r : pending_) out_.sign_requirements.push_back(r);
    pending_.clear();

    const std::string name = "_t" + std::to_string(++counter_);
    DeclaredName d;
    d.decl.name = name;
    d.decl.role = Role::kVariable;
    d.decl.shape = inner->shape;
    d.decl.span = e->span;
    d.kind = inner->shape.is_scalar()   ? DeclKind::kScalar
             : inner->shape.is_column() ? DeclKind::kVector
                                        : DeclKind::kMatrix;
    out_.variables.push_back(d);
    out_.epigraph.push_back({name, inner});

    const Expr t = build::variable(name, inner->shape);
    auto row = [&](const Expr& lhs) {
      Constraint c;
      c.lhs = lhs;
      c.relation = Relation::kLe;
      c.rhs = build::constant(0.0);
      c.origin = e->span;
      c.epigraph = true;
      out_.constraints.push_back(c);
    };
    row(build::sub(inner, t));
    row(build::sub(build::neg(inner), t));
    return e->op == Op::kNorm1 ? build::sum(t) : t;
  }

  ProblemSpec& out_;
  int counter_ = 0;
  std::vector<SignRequirement> pending_;
};

}  // namespace

ProblemSpec desmooth(const ProblemSpec& spec_in) {
  ProblemSpec spec = spec_in.validated ? spec_in : validate(spec_in);
  ProblemSpec out = spec;
  out.constraints.clear();
  if (!out.original_objective) out.original_objective = spec.objective.expr;
  Desmoother d(out);
  const int sense = spec.objective.sense == Sense::kMin ? 1 : -1;
  out.objective.expr = d.rewrite(spec.objective.expr, sense);
  std::vector<Constraint> rewritten;
  for (const Constraint& c : spec.constraints) {
    Constraint r = c;
    const int lhs_pol = c.relation == Relation::kEq ? 0 : c.relation == Relation::kLe ? 1 : -1;
    r.lhs = d.rewrite(c.lhs, lhs_pol);
    r.rhs = d.rewrite(c.rhs, -lhs_pol);
    rewritten.push_back(r);
  }
  // written constraints first, then the epigraph rows in creation order
  std::vector<Constraint> epi = std::move(out.constraints);
  out.constraints = std::move(rewritten);
  out.constraints.insert(out.constraints.end(), epi.begin(), epi.end());
  return out;
}

// ---------------------------------------------------------------- compile

namespace {

Dense orient(const DeclaredName& d, Dense v) {
  const std::string& name = d.decl.name;
  switch (d.kind) {
    case DeclKind::kScalar:
      if (v.size() != 1) {
        throw Error(ErrorKind::kBinding, "parameter '" + name + "' is Scalar but its data is " +
                                             std::to_string(v.rows()) + "x" +
                                             std::to_string(v.cols()));
      }
      return v;
    case DeclKind::kVector:
      if (v.cols() == 1) return v;
      if (v.rows() == 1) return Dense(v.cols(), 1, v.storage());
      throw Error(ErrorKind::kBinding, "parameter '" + name + "' is a Vector but its data is " +
                                           std::to_string(v.rows()) + "x" +
                                           std::to_string(v.cols()));
    case DeclKind::kMatrix: return v;
  }
  return v;
}

void bind_dim(DimBinding& dims, const Dim& d, std::size_t n, const std::string& ctx) {
  try {
    dims.bind(d, n, ctx);
  } catch (const Error& e) {
    throw Error(ErrorKind::kShapeUnification, e.what());
  }
}

std::size_t resolve_dim(const DimBinding& dims, const Dim& d, const std::string& what) {
  if (auto n = dims.resolve(d)) return *n;
  throw Error(ErrorKind::kShapeUnification,
              "size " + to_string(d) + " of " + what + " is not determined by the bound data");
}

void require_smooth(const Expr& e, const std::string& what) {
  if (contains_nonsmooth(e)) {
    throw Error(ErrorKind::kNonSmoothResidue,
                "non-smooth node left in " + what + ": '" + to_string(e) + "'", e->span);
  }
}

}  // namespace

CompiledProblem compile(const ProblemSpec& spec_in, const Env& data, const VariableSizes& sizes) {
  const ProblemSpec spec = spec_in.validated ? spec_in : validate(spec_in);
  CompiledProblem cp;
  DimBinding dims;

  for (const auto& [name, value] : data.values()) {
    const DeclaredName* d = spec.find(name);
    if (d == nullptr || d->decl.role != Role::kParameter) {
      throw Error(ErrorKind::kBinding, "data bound to '" + name + "', which is not a parameter");
    }
  }
  for (const DeclaredName& p : spec.parameters) {
    const Dense* v = data.find(p.decl.name);
    if (v == nullptr) {
      throw Error(ErrorKind::kBinding, "no data bound for parameter '" + p.decl.name + "'",
                  p.decl.span);
    }
    Dense value = orient(p, *v);
    if (p.decl.shape.is_matrix()) {
      const std::string ctx = "parameter '" + p.decl.name + "'";
      bind_dim(dims, p.decl.shape.rows(), value.rows(), ctx);
      bind_dim(dims, p.decl.shape.cols(), value.cols(), ctx);
    }
    cp.data.set(p.decl.name, std::move(value));
    cp.data.set_symmetric(p.decl.name, p.decl.symmetric);
  }
  for (const SignRequirement& r : spec.sign_requirements) {
    const double v = cp.data.at(r.parameter).value();
    const bool ok = r.strictly_positive ? v > 0.0 : v >= 0.0;
    if (!ok) {
      throw Error(ErrorKind::kBinding,
                  "parameter '" + r.parameter + "' scales a norm1/abs term and must be " +
                      (r.strictly_positive ? "positive" : "nonnegative") + ", got " +
                      std::to_string(v),
                  r.span);
    }
  }

  for (const auto& [name, extent] : sizes) {
    const DeclaredName* d = spec.find(name);
    if (d == nullptr || d->decl.role != Role::kVariable) {
      throw Error(ErrorKind::kBinding, "size given for '" + name + "', which is not a variable");
    }
    const std::string ctx = "size of variable '" + name + "'";
    if (!d->decl.shape.is_matrix()) {
      if (extent.first != 1 || extent.second != 1) {
        throw Error(ErrorKind::kShapeUnification, ctx + ": scalar variable cannot be " +
                                                      std::to_string(extent.first) + "x" +
                                                      std::to_string(extent.second));
      }
      continue;
    }
    bind_dim(dims, d->decl.shape.rows(), extent.first, ctx);
    bind_dim(dims, d->decl.shape.cols(), extent.second, ctx);
  }

  std::set<std::string> auxiliary;
  for (const auto& e : spec.epigraph) auxiliary.insert(e.name);
  for (const DeclaredName& v : spec.variables) {
    VariableBlock b;
    b.name = v.decl.name;
    const std::string what = "variable '" + v.decl.name + "'";
    if (v.decl.shape.is_matrix()) {
      b.rows = resolve_dim(dims, v.decl.shape.rows(), what);
      b.cols = resolve_dim(dims, v.decl.shape.cols(), what);
      b.shape = Shape::matrix(Dim::fixed(b.rows), Dim::fixed(b.cols));
    } else {
      b.shape = Shape::scalar();
    }
    b.offset = cp.n;
    b.auxiliary = auxiliary.count(b.name) != 0;
    cp.n += b.size();
    cp.variables.push_back(b);
  }
  cp.data.dims = dims;
  cp.epigraph = spec.epigraph;
  cp.lower.assign(cp.n, -std::numeric_limits<double>::infinity());
  cp.upper.assign(cp.n, std::numeric_limits<double>::infinity());

  cp.sense = spec.objective.sense;
  cp.source_objective = spec.original_objective ? spec.original_objective : spec.objective.expr;
  require_smooth(spec.objective.expr, "the objective");
  Expr f = spec.objective.expr;
  if (cp.sense == Sense::kMax) f = build::neg(f);

  Evaluator constants(cp.data);
  auto size_of = [&](const Shape& s, const std::string& what) -> std::pair<std::size_t, std::size_t> {
    if (!s.is_matrix()) return {1, 1};
    return {resolve_dim(dims, s.rows(), what), resolve_dim(dims, s.cols(), what)};
  };

  for (const Constraint& c : spec.constraints) {
    const std::string what = "constraint" + at_text(c.origin);
    require_smooth(c.lhs, what);
    require_smooth(c.rhs, what);
    const Shape& shape = c.lhs->shape.is_scalar() ? c.rhs->shape : c.lhs->shape;
    const auto [r, k] = size_of(shape, what);
    (c.epigraph ? cp.epigraph_rows : cp.source_rows) += r * k;

    if (c.relation != Relation::kEq) {
      const bool var_left = c.lhs->op == Op::kVariable && !has_variable(c.rhs);
      const bool var_right = c.rhs->op == Op::kVariable && !has_variable(c.lhs);
      if (var_left || var_right) {
        const Expr& var = var_left ? c.lhs : c.rhs;
        const Expr& bound = var_left ? c.rhs : c.lhs;
        if (bound->shape.is_scalar() || bound->shape == var->shape) {
          const VariableBlock* b = cp.find(var->name);
          const Dense& value = constants.value(bound);
          // var <= c or c >= var is an upper bound
          const bool upper = (c.relation == Relation::kLe) == var_left;
          for (std::size_t i = 0; i < b->size(); ++i) {
            const double v = value.size() == 1 ? value[0] : value[i];
            double& slot = upper ? cp.upper[b->offset + i] : cp.lower[b->offset + i];
            slot = upper ? std::min(slot, v) : std::max(slot, v);
          }
          cp.bound_rows += b->size();
          continue;
        }
      }
    }

    Expr lhs = c.lhs;
    Expr rhs = c.rhs;
    if (lhs->shape.is_scalar() && !rhs->shape.is_scalar()) lhs = build::broadcast(lhs, rhs->shape);
    if (rhs->shape.is_scalar() && !lhs->shape.is_scalar()) rhs = build::broadcast(rhs, lhs->shape);
    Residual res;
    res.expr = c.relation == Relation::kGe ? build::sub(rhs, lhs) : build::sub(lhs, rhs);
    res.shape_rows = r;
    res.shape_cols = k;
    res.rows = r * k;
    res.origin = c.origin;
    res.epigraph = c.epigraph;
    if (c.relation == Relation::kEq) {
      res.offset = cp.m;
      cp.m += res.rows;
      res.seed = "_u" + std::to_string(cp.eq.size());
      cp.eq.push_back(res);
    } else {
      res.offset = cp.p;
      cp.p += res.rows;
      res.seed = "_v" + std::to_string(cp.ineq.size());
      cp.ineq.push_back(res);
    }
  }

  for (std::size_t i = 0; i < cp.n; ++i) {
    if (cp.lower[i] > cp.upper[i] || std::isnan(cp.lower[i]) || std::isnan(cp.upper[i])) {
      for (const auto& b : cp.variables) {
        if (i >= b.offset && i < b.offset + b.size()) {
          throw Error(ErrorKind::kInfeasibleBounds,
                      "bounds on '" + b.name + "' entry " + std::to_string(i - b.offset) +
                          " are empty: [" + std::to_string(cp.lower[i]) + ", " +
                          std::to_string(cp.upper[i]) + "]");
        }
      }
    }
  }

  Interner interner;
  cp.objective = interner.intern(f);
  for (auto& r : cp.eq) r.expr = interner.intern(r.expr);
  for (auto& r : cp.ineq) r.expr = interner.intern(r.expr);

  std::vector<DiffVariable> vars;
  for (const auto& b : cp.variables) {
    const DeclaredName* d = spec.find(b.name);
    vars.push_back({b.name, d->decl.shape});
  }
  Expr lagrangian = cp.objective;
  for (const auto* group : {&cp.eq, &cp.ineq}) {
    for (const Residual& r : *group) {
      const Expr seed = build::parameter(r.seed, r.expr->shape);
      lagrangian = build::add(lagrangian, build::inner(seed, r.expr));
    }
  }
  for (auto& [name, g] : differentiate(cp.objective, vars)) {
    cp.objective_gradient[name] = interner.intern(g);
  }
  for (auto& [name, g] : differentiate(lagrangian, vars)) {
    cp.lagrangian_gradient[name] = interner.intern(g);
  }
  return cp;
}

CompiledProblem compile_model(std::string_view text, const Env& data, const VariableSizes& sizes) {
  return compile(desmooth(validate(parse_model(text))), data, sizes);
}

// ---------------------------------------------------------------- problem

const VariableBlock* CompiledProblem::find(std::string_view name) const {
  for (const auto& b : variables) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

Dense CompiledProblem::block_value(const VariableBlock& b, const std::vector<double>& x) const {
  Dense v(b.rows, b.cols);
  std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(b.offset), b.size(), v.data());
  return v;
}

Evaluator CompiledProblem::session(const std::vector<double>& x) const {
  Evaluator s(data);
  for (const auto& b : variables) s.bind(b.name, block_value(b, x));
  return s;
}

void CompiledProblem::gather(Evaluator& s, const GradientSet& grads, std::vector<double>& out) const {
  out.resize(n);
  for (const auto& b : variables) {
    const Dense& v = s.value(grads.at(b.name));
    if (v.size() != b.size()) {
      throw Error(ErrorKind::kDimension, "gradient of '" + b.name + "' has " +
                                             std::to_string(v.size()) + " entries, expected " +
                                             std::to_string(b.size()));
    }
    std::copy_n(v.data(), b.size(), out.begin() + static_cast<std::ptrdiff_t>(b.offset));
  }
}

void CompiledProblem::bind_seeds(Evaluator& s, const std::vector<double>& u,
                                 const std::vector<double>& v) const {
  auto bind = [&](const std::vector<Residual>& group, const std::vector<double>& flat) {
    for (const Residual& r : group) {
      Dense seed(r.shape_rows, r.shape_cols);
      std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(r.offset), r.rows, seed.data());
      s.bind(r.seed, std::move(seed));
    }
  };
  bind(eq, u);
  bind(ineq, v);
}

double CompiledProblem::eval_objective(Evaluator& s) const { return s.value(objective).value(); }

namespace {

void stack(Evaluator& s, const std::vector<Residual>& group, std::size_t total,
           std::vector<double>& out) {
  out.resize(total);
  for (const Residual& r : group) {
    const Dense& v = s.value(r.expr);
    if (v.size() != r.rows) {
      throw Error(ErrorKind::kDimension, "constraint" + at_text(r.origin) + " has " +
                                             std::to_string(v.size()) + " rows, expected " +
                                             std::to_string(r.rows));
    }
    std::copy_n(v.data(), r.rows, out.begin() + static_cast<std::ptrdiff_t>(r.offset));
  }
}

}  // namespace

void CompiledProblem::eval_eq(Evaluator& s, std::vector<double>& out) const { stack(s, eq, m, out); }

void CompiledProblem::eval_ineq(Evaluator& s, std::vector<double>& out) const {
  stack(s, ineq, p, out);
}

std::vector<double> CompiledProblem::initial_point(const std::map<std::string, Dense>& start) const {
  std::vector<double> x(n, 0.0);
  for (const auto& b : variables) {
    auto it = start.find(b.name);
    if (it == start.end()) continue;
    if (it->second.size() != b.size()) {
      throw Error(ErrorKind::kBinding, "start value for '" + b.name + "' has " +
                                           std::to_string(it->second.size()) + " entries, expected " +
                                           std::to_string(b.size()));
    }
    std::copy_n(it->second.data(), b.size(), x.begin() + static_cast<std::ptrdiff_t>(b.offset));
  }
  for (std::size_t i = 0; i < n; ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
  if (!epigraph.empty()) {
    Evaluator s = session(x);
    for (const auto& e : epigraph) {
      const VariableBlock* b = find(e.name);
      const Dense& v = s.value(e.source);
      for (std::size_t i = 0; i < b->size(); ++i) {
        const double t = std::fabs(v.size() == 1 ? v[0] : v[i]) + 1.0;
        x[b->offset + i] = std::isfinite(t) ? t : 1.0;
      }
    }
  }
  return x;
}

double CompiledProblem::source_objective_value(const std::vector<double>& x) const {
  Evaluator s = session(x);
  return s.value(source_objective).value();
}

}  // namespace declsolve
