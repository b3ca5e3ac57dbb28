#include "declsolve/model.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

namespace declsolve {

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::kParameters: return "'parameters'";
    case TokenKind::kVariables: return "'variables'";
    case TokenKind::kMin: return "'min'";
    case TokenKind::kMax: return "'max'";
    case TokenKind::kSt: return "'st'";
    case TokenKind::kIdent: return "identifier";
    case TokenKind::kNumber: return "number";
    case TokenKind::kPlus: return "'+'";
    case TokenKind::kMinus: return "'-'";
    case TokenKind::kStar: return "'*'";
    case TokenKind::kSlash: return "'/'";
    case TokenKind::kDotStar: return "'.*'";
    case TokenKind::kDotSlash: return "'./'";
    case TokenKind::kCaret: return "'^'";
    case TokenKind::kDotCaret: return "'.^'";
    case TokenKind::kTranspose: return "transpose";
    case TokenKind::kLParen: return "'('";
    case TokenKind::kRParen: return "')'";
    case TokenKind::kComma: return "','";
    case TokenKind::kEqEq: return "'=='";
    case TokenKind::kLessEq: return "'<='";
    case TokenKind::kGreaterEq: return "'>='";
    case TokenKind::kLess: return "'<'";
    case TokenKind::kGreater: return "'>'";
  }
  return "token";
}

std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::kEq: return "==";
    case Relation::kLe: return "<=";
    case Relation::kGe: return ">=";
  }
  return "?";
}

// ---------------------------------------------------------------- lexer

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}
bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_blank();
      if (pos_ >= text_.size()) break;
      out.push_back(next());
    }
    return out;
  }

 private:
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos_ < text_.size(); ++i) {
      if (text_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  void skip_blank() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
        advance();
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  Token make(TokenKind kind, std::size_t start, std::size_t line, std::size_t col) const {
    Token t;
    t.kind = kind;
    t.text = std::string(text_.substr(start, pos_ - start));
    t.span = Span{start, pos_ - start, line, col};
    return t;
  }

  Token next() {
    const std::size_t start = pos_;
    const std::size_t line = line_;
    const std::size_t col = col_;
    const char c = peek();

    if (is_ident_start(c)) {
      while (is_ident_char(peek())) advance();
      Token t = make(TokenKind::kIdent, start, line, col);
      if (t.text == "parameters") t.kind = TokenKind::kParameters;
      else if (t.text == "variables") t.kind = TokenKind::kVariables;
      else if (t.text == "min") t.kind = TokenKind::kMin;
      else if (t.text == "max") t.kind = TokenKind::kMax;
      else if (t.text == "st") t.kind = TokenKind::kSt;
      return t;
    }
    if (is_digit(c) || (c == '.' && is_digit(peek(1)))) return number(start, line, col);

    auto two = [&](char a, char b) { return c == a && peek(1) == b; };
    struct Pair {
      char a, b;
      TokenKind kind;
    };
    static constexpr std::array<Pair, 6> kPairs{{
        {'.', '*', TokenKind::kDotStar},
        {'.', '/', TokenKind::kDotSlash},
        {'.', '^', TokenKind::kDotCaret},
        {'=', '=', TokenKind::kEqEq},
        {'<', '=', TokenKind::kLessEq},
        {'>', '=', TokenKind::kGreaterEq},
    }};
    for (const Pair& p : kPairs) {
      if (two(p.a, p.b)) {
        advance(2);
        return make(p.kind, start, line, col);
      }
    }
    TokenKind kind;
    switch (c) {
      case '+': kind = TokenKind::kPlus; break;
      case '-': kind = TokenKind::kMinus; break;
      case '*': kind = TokenKind::kStar; break;
      case '/': kind = TokenKind::kSlash; break;
      case '^': kind = TokenKind::kCaret; break;
      case '\'': kind = TokenKind::kTranspose; break;
      case '(': kind = TokenKind::kLParen; break;
      case ')': kind = TokenKind::kRParen; break;
      case ',': kind = TokenKind::kComma; break;
      case '<': kind = TokenKind::kLess; break;
      case '>': kind = TokenKind::kGreater; break;
      default: {
        std::string shown;
        if (std::isprint(static_cast<unsigned char>(c)) != 0) {
          shown = std::string("'") + c + "'";
        } else {
          char buf[8];
          std::snprintf(buf, sizeof buf, "0x%02X", static_cast<unsigned>(static_cast<unsigned char>(c)));
          shown = buf;
        }
        std::string msg = "illegal character " + shown + " at line " + std::to_string(line) +
                          ", column " + std::to_string(col);
        if (c == '=') msg += " (did you mean '=='?)";
        throw Error(ErrorKind::kLex, msg, Span{start, 1, line, col});
      }
    }
    advance();
    return make(kind, start, line, col);
  }

  Token number(std::size_t start, std::size_t line, std::size_t col) {
    while (is_digit(peek())) advance();
    if (peek() == '.') {
      const char after = peek(1);
      // `2.*x` is `2 .* x`, not `2. * x`
      if (after != '*' && after != '/' && after != '^' && after != '\'') {
        advance();
        while (is_digit(peek())) advance();
      }
    }
    if (peek() == 'e' || peek() == 'E') {
      std::size_t k = 1;
      if (peek(1) == '+' || peek(1) == '-') k = 2;
      if (is_digit(peek(k))) {
        advance(k);
        while (is_digit(peek())) advance();
      }
    }
    Token t = make(TokenKind::kNumber, start, line, col);
    const char* first = text_.data() + start;
    const char* last = text_.data() + pos_;
    // from_chars rejects a leading '.', so prepend a zero for ".5"
    std::string buf = t.text.front() == '.' ? "0" + t.text : t.text;
    auto res = std::from_chars(buf.data(), buf.data() + buf.size(), t.number);
    (void)first;
    (void)last;
    if (res.ec != std::errc() || res.ptr != buf.data() + buf.size()) {
      throw Error(ErrorKind::kLex, "malformed number '" + t.text + "'", t.span);
    }
    return t;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

}  // namespace

std::vector<Token> tokenize(std::string_view text) { return Lexer(text).run(); }

// ---------------------------------------------------------------- parser

namespace {

constexpr int kMaxDepth = 256;

struct FunctionEntry {
  std::string_view name;
  Op op;
};

constexpr std::array<FunctionEntry, 13> kFunctions{{
    {"log", Op::kLog},
    {"exp", Op::kExp},
    {"sin", Op::kSin},
    {"cos", Op::kCos},
    {"tanh", Op::kTanh},
    {"abs", Op::kAbs},
    {"norm1", Op::kNorm1},
    {"norm2", Op::kNorm2},
    {"sum", Op::kSum},
    {"tr", Op::kTrace},
    {"det", Op::kDet},
    {"inv", Op::kInv},
    {"vector", Op::kBroadcast},
}};

const FunctionEntry* find_function(std::string_view name) {
  for (const auto& f : kFunctions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

class Parser {
 public:
  explicit Parser(const std::vector<Token>& tokens) : toks_(tokens) {}

  ProblemSpec run() {
    ProblemSpec spec;
    std::set<std::string> names;
    if (at(TokenKind::kParameters)) {
      ++pos_;
      parse_decls(spec.parameters, Role::kParameter, names);
    }
    if (!at(TokenKind::kVariables)) {
      if (at(TokenKind::kMin) || at(TokenKind::kMax)) {
        fail("expected 'variables' block before the objective");
      }
      fail(pos_ == 0 && !toks_.empty() ? "expected 'parameters' or 'variables'"
                                       : "expected 'variables'");
    }
    ++pos_;
    parse_decls(spec.variables, Role::kVariable, names);
    if (spec.variables.empty()) fail("expected at least one variable declaration");

    if (!at(TokenKind::kMin) && !at(TokenKind::kMax)) {
      throw Error(ErrorKind::kMissingObjective,
                  "missing objective: expected 'min' or 'max' " + here(), current_span());
    }
    spec.objective.sense = at(TokenKind::kMin) ? Sense::kMin : Sense::kMax;
    ++pos_;
    spec.objective.expr = expression(0);

    if (at(TokenKind::kSt)) {
      ++pos_;
      while (pos_ < toks_.size()) spec.constraints.push_back(constraint());
    }
    if (pos_ < toks_.size()) {
      if (at(TokenKind::kMin) || at(TokenKind::kMax)) {
        fail("a model has exactly one objective");
      }
      fail("expected 'st', an operator, or end of model");
    }
    return spec;
  }

 private:
  bool at(TokenKind k) const { return pos_ < toks_.size() && toks_[pos_].kind == k; }

  Span current_span() const {
    if (pos_ < toks_.size()) return toks_[pos_].span;
    if (toks_.empty()) return Span{};
    const Span& last = toks_.back().span;
    return Span{last.offset + last.length, 0, last.line, last.column + last.length};
  }

  std::string here() const {
    const Span s = current_span();
    std::string found = pos_ < toks_.size() ? "'" + toks_[pos_].text + "'" : "end of model";
    return "but found " + found + " at line " + std::to_string(s.line) + ", column " +
           std::to_string(s.column);
  }

  [[noreturn]] void fail(const std::string& expected) const {
    throw Error(ErrorKind::kParse, expected + " " + here(), current_span());
  }

  const Token& expect(TokenKind k) {
    if (!at(k)) fail("expected " + std::string(to_string(k)));
    return toks_[pos_++];
  }

  static bool is_type_name(const Token& t) {
    return t.kind == TokenKind::kIdent &&
           (t.text == "Matrix" || t.text == "Vector" || t.text == "Scalar");
  }

  void parse_decls(std::vector<DeclaredName>& out, Role role, std::set<std::string>& names) {
    while (pos_ < toks_.size() && is_type_name(toks_[pos_])) {
      const Token& type = toks_[pos_++];
      if (!at(TokenKind::kIdent) || is_type_name(toks_[pos_])) fail("expected a name after " + type.text);
      const Token& name = toks_[pos_++];
      if (find_function(name.text) != nullptr || name.text == "symmetric") {
        throw Error(ErrorKind::kParse, "'" + name.text + "' is reserved and cannot be declared",
                    name.span);
      }
      if (!names.insert(name.text).second) {
        throw Error(ErrorKind::kDuplicateName,
                    "'" + name.text + "' is declared more than once (line " +
                        std::to_string(name.span.line) + ")",
                    name.span);
      }
      DeclaredName d;
      d.decl.name = name.text;
      d.decl.role = role;
      d.decl.span = Span::cover(type.span, name.span);
      d.kind = type.text == "Matrix"   ? DeclKind::kMatrix
               : type.text == "Vector" ? DeclKind::kVector
                                       : DeclKind::kScalar;
      if (at(TokenKind::kIdent) && toks_[pos_].text == "symmetric") {
        if (d.kind != DeclKind::kMatrix) fail("only a Matrix can be declared symmetric");
        if (role != Role::kParameter) fail("only parameters can be declared symmetric");
        d.decl.symmetric = true;
        d.decl.span = Span::cover(d.decl.span, toks_[pos_].span);
        ++pos_;
      }
      out.push_back(std::move(d));
    }
  }

  Constraint constraint() {
    const std::size_t begin = pos_;
    Constraint c;
    c.lhs = expression(0);
    if (at(TokenKind::kEqEq)) {
      c.relation = Relation::kEq;
    } else if (at(TokenKind::kLessEq) || at(TokenKind::kLess)) {
      c.relation = Relation::kLe;
      c.strict_spelling = at(TokenKind::kLess);
    } else if (at(TokenKind::kGreaterEq) || at(TokenKind::kGreater)) {
      c.relation = Relation::kGe;
      c.strict_spelling = at(TokenKind::kGreater);
    } else {
      fail("expected a relation ('==', '<=', '>=')");
    }
    ++pos_;
    c.rhs = expression(0);
    if (at(TokenKind::kEqEq) || at(TokenKind::kLessEq) || at(TokenKind::kGreaterEq) ||
        at(TokenKind::kLess) || at(TokenKind::kGreater)) {
      fail("chained relations are not supported; write two constraints, so expected end of constraint");
    }
    c.origin = Span::cover(toks_[begin].span, toks_[pos_ - 1].span);
    return c;
  }

  void enter(int depth) const {
    if (depth > kMaxDepth) fail("expression nested too deeply; expected a simpler expression");
  }

  static Span span_of(const Expr& a, const Expr& b) { return Span::cover(a->span, b->span); }

  Expr expression(int depth) {
    enter(depth);
    Expr lhs = term(depth + 1);
    while (at(TokenKind::kPlus) || at(TokenKind::kMinus)) {
      const Op op = at(TokenKind::kPlus) ? Op::kAdd : Op::kSub;
      ++pos_;
      Expr rhs = term(depth + 1);
      const Span s = span_of(lhs, rhs);
      lhs = make_node(op, {lhs, rhs}, s);
    }
    return lhs;
  }

  Expr term(int depth) {
    enter(depth);
    Expr lhs = unary(depth + 1);
    while (true) {
      Op op;
      if (at(TokenKind::kStar)) op = Op::kMul;
      else if (at(TokenKind::kSlash)) op = Op::kDiv;
      else if (at(TokenKind::kDotStar)) op = Op::kEMul;
      else if (at(TokenKind::kDotSlash)) op = Op::kEDiv;
      else break;
      ++pos_;
      Expr rhs = unary(depth + 1);
      const Span s = span_of(lhs, rhs);
      lhs = make_node(op, {lhs, rhs}, s);
    }
    return lhs;
  }

  Expr unary(int depth) {
    enter(depth);
    if (at(TokenKind::kMinus) || at(TokenKind::kPlus)) {
      const bool minus = at(TokenKind::kMinus);
      const Span start = toks_[pos_++].span;
      Expr inner = unary(depth + 1);
      if (!minus) return inner;
      return make_node(Op::kNeg, {inner}, Span::cover(start, inner->span));
    }
    return power(depth + 1);
  }

  Expr power(int depth) {
    enter(depth);
    Expr base = postfix(depth + 1);
    while (at(TokenKind::kCaret) || at(TokenKind::kDotCaret)) {
      const Op op = at(TokenKind::kCaret) ? Op::kPow : Op::kEPow;
      ++pos_;
      Expr exponent = signed_postfix(depth + 1);
      const Span s = span_of(base, exponent);
      base = make_node(op, {base, exponent}, s);
    }
    return base;
  }

  Expr signed_postfix(int depth) {
    enter(depth);
    if (at(TokenKind::kMinus) || at(TokenKind::kPlus)) {
      const bool minus = at(TokenKind::kMinus);
      const Span start = toks_[pos_++].span;
      Expr inner = signed_postfix(depth + 1);
      if (!minus) return inner;
      return make_node(Op::kNeg, {inner}, Span::cover(start, inner->span));
    }
    return postfix(depth + 1);
  }

  Expr postfix(int depth) {
    Expr e = primary(depth + 1);
    while (at(TokenKind::kTranspose)) {
      const Span s = Span::cover(e->span, toks_[pos_].span);
      ++pos_;
      e = make_node(Op::kTranspose, {e}, s);
    }
    return e;
  }

  Expr primary(int depth) {
    enter(depth);
    if (at(TokenKind::kNumber)) {
      const Token& t = toks_[pos_++];
      return make_constant(t.number, t.span);
    }
    if (at(TokenKind::kIdent)) {
      const Token& t = toks_[pos_++];
      if (at(TokenKind::kLParen)) {
        const FunctionEntry* fn = find_function(t.text);
        if (fn == nullptr) {
          throw Error(ErrorKind::kParse, "unknown function '" + t.text + "' at line " +
                                             std::to_string(t.span.line) + ", column " +
                                             std::to_string(t.span.column),
                      t.span);
        }
        ++pos_;
        Expr arg = expression(depth + 1);
        if (at(TokenKind::kComma)) fail(std::string(fn->name) + " takes one argument; expected ')'");
        const Token& close = expect(TokenKind::kRParen);
        return make_node(fn->op, {arg}, Span::cover(t.span, close.span));
      }
      return make_ref(Op::kParameter, t.text, t.span);
    }
    if (at(TokenKind::kLParen)) {
      const Span open = toks_[pos_++].span;
      Expr inner = expression(depth + 1);
      const Token& close = expect(TokenKind::kRParen);
      (void)open;
      (void)close;
      return inner;
    }
    fail("expected a number, a name, a function call, or '('");
  }

  const std::vector<Token>& toks_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<Declaration> ProblemSpec::declarations() const {
  std::vector<Declaration> out;
  out.reserve(parameters.size() + variables.size());
  for (const auto& p : parameters) out.push_back(p.decl);
  for (const auto& v : variables) out.push_back(v.decl);
  return out;
}

const DeclaredName* ProblemSpec::find(std::string_view name) const {
  for (const auto& p : parameters) {
    if (p.decl.name == name) return &p;
  }
  for (const auto& v : variables) {
    if (v.decl.name == name) return &v;
  }
  return nullptr;
}

ProblemSpec parse(const std::vector<Token>& tokens) { return Parser(tokens).run(); }

ProblemSpec parse_model(std::string_view text) { return parse(tokenize(text)); }

// ---------------------------------------------------------------- validate

ProblemSpec validate(const ProblemSpec& spec) {
  ShapeInference inference;
  ProblemSpec out = spec;
  auto declare = [&](DeclaredName& d) {
    switch (d.kind) {
      case DeclKind::kScalar: d.decl.shape = inference.declare_scalar(); break;
      case DeclKind::kVector: d.decl.shape = inference.declare_vector(); break;
      case DeclKind::kMatrix: d.decl.shape = inference.declare_matrix(); break;
    }
  };
  for (auto& p : out.parameters) declare(p);
  for (auto& v : out.variables) declare(v);
  const std::vector<Declaration> decls = out.declarations();

  out.objective.expr = inference.annotate(spec.objective.expr, decls);
  if (!out.objective.expr->shape.is_scalar()) {
    throw Error(ErrorKind::kNonScalarObjective,
                "objective must be Scalar but is " +
                    to_string(inference.canonical(out.objective.expr->shape)),
                spec.objective.expr->span);
  }
  for (auto& c : out.constraints) {
    c.lhs = inference.annotate(c.lhs, decls);
    c.rhs = inference.annotate(c.rhs, decls);
    const Shape& a = c.lhs->shape;
    const Shape& b = c.rhs->shape;
    if (a.is_matrix() && b.is_matrix()) {
      ExprNode where;
      where.op = Op::kSub;
      where.span = c.origin;
      inference.unify(a.rows(), b.rows(), where);
      inference.unify(a.cols(), b.cols(), where);
    }
  }
  inference.check_broadcasts();

  out.objective.expr = inference.finish(out.objective.expr);
  for (auto& c : out.constraints) {
    c.lhs = inference.finish(c.lhs);
    c.rhs = inference.finish(c.rhs);
  }
  for (auto& p : out.parameters) p.decl.shape = inference.canonical(p.decl.shape);
  for (auto& v : out.variables) v.decl.shape = inference.canonical(v.decl.shape);
  out.validated = true;
  return out;
}

// ---------------------------------------------------------------- printing

std::string pretty_print(const ProblemSpec& spec) {
  std::string out;
  auto decl_line = [&](const DeclaredName& d) {
    out += "  ";
    out += d.kind == DeclKind::kMatrix ? "Matrix " : d.kind == DeclKind::kVector ? "Vector " : "Scalar ";
    out += d.decl.name;
    if (d.decl.symmetric) out += " symmetric";
    out += '\n';
  };
  if (!spec.parameters.empty()) {
    out += "parameters\n";
    for (const auto& p : spec.parameters) decl_line(p);
  }
  out += "variables\n";
  for (const auto& v : spec.variables) decl_line(v);
  out += spec.objective.sense == Sense::kMin ? "min\n  " : "max\n  ";
  out += to_string(spec.objective.expr);
  out += '\n';
  if (!spec.constraints.empty()) {
    out += "st\n";
    for (const auto& c : spec.constraints) {
      out += "  ";
      // A leading unary minus would merge with the previous constraint.
      const bool wrap = c.lhs->op == Op::kNeg ||
                        (c.lhs->op == Op::kConstant && std::signbit(c.lhs->value));
      if (wrap) out += '(';
      out += to_string(c.lhs);
      if (wrap) out += ')';
      out += ' ';
      if (c.strict_spelling) {
        out += c.relation == Relation::kLe ? "<" : ">";
      } else {
        out += to_string(c.relation);
      }
      out += ' ';
      out += to_string(c.rhs);
      out += '\n';
    }
  }
  return out;
}

bool structurally_equal(const ProblemSpec& a, const ProblemSpec& b) {
  auto same_decls = [](const std::vector<DeclaredName>& x, const std::vector<DeclaredName>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i].decl.name != y[i].decl.name || x[i].kind != y[i].kind ||
          x[i].decl.symmetric != y[i].decl.symmetric) {
        return false;
      }
    }
    return true;
  };
  if (!same_decls(a.parameters, b.parameters) || !same_decls(a.variables, b.variables)) {
    return false;
  }
  if (a.objective.sense != b.objective.sense ||
      !structurally_equal(a.objective.expr, b.objective.expr)) {
    return false;
  }
  if (a.constraints.size() != b.constraints.size()) return false;
  for (std::size_t i = 0; i < a.constraints.size(); ++i) {
    const auto& x = a.constraints[i];
    const auto& y = b.constraints[i];
    if (x.relation != y.relation || !structurally_equal(x.lhs, y.lhs) ||
        !structurally_equal(x.rhs, y.rhs)) {
      return false;
    }
  }
  return true;
}

}  // namespace declsolve
