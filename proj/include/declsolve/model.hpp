#pragma once

// The four-block modeling language:
//
//   parameters            (optional)
//     Matrix A [symmetric]
//     Vector b
//     Scalar c
//   variables
//     Vector x
//   min | max
//     <expression>
//   st                    (optional)
//     <expression> (== | <= | >=) <expression>
//     ...
//
// The grammar is newline-insensitive; `#` starts a comment that runs to the
// end of the line. `<` and `>` are accepted and mean `<=` and `>=`.

#include <string>
#include <string_view>
#include <vector>

#include "declsolve/expr.hpp"
#include "declsolve/shape_infer.hpp"

namespace declsolve {

enum class TokenKind {
  kParameters,
  kVariables,
  kMin,
  kMax,
  kSt,
  kIdent,
  kNumber,
  kPlus,
  kMinus,
  kStar,
  kSlash,
  kDotStar,
  kDotSlash,
  kCaret,
  kDotCaret,
  kTranspose,
  kLParen,
  kRParen,
  kComma,
  kEqEq,
  kLessEq,
  kGreaterEq,
  kLess,
  kGreater,
};

std::string_view to_string(TokenKind kind);

struct Token {
  TokenKind kind;
  std::string text;
  double number = 0.0;
  Span span;
};

/// Splits model text into tokens. Throws kLex with the position of the first
/// illegal character.
std::vector<Token> tokenize(std::string_view text);

enum class DeclKind { kScalar, kVector, kMatrix };
enum class Sense { kMin, kMax };
enum class Relation { kEq, kLe, kGe };

struct Objective {
  Sense sense = Sense::kMin;
  Expr expr;
};

struct Constraint {
  Expr lhs;
  Relation relation = Relation::kEq;
  Expr rhs;
  Span origin;
  bool strict_spelling = false;  // written as `<` or `>`
  bool epigraph = false;         // added by the epigraph rewrite
};

/// Auxiliary variable introduced by the epigraph rewrite; it bounds |source|.
struct EpigraphVariable {
  std::string name;
  Expr source;
};

/// A scalar parameter whose sign the rewrite relied on.
struct SignRequirement {
  std::string parameter;
  bool strictly_positive = false;
  Span span;
};

struct DeclaredName {
  Declaration decl;
  DeclKind kind = DeclKind::kScalar;
};

struct ProblemSpec {
  std::vector<DeclaredName> parameters;
  std::vector<DeclaredName> variables;
  Objective objective;
  std::vector<Constraint> constraints;
  bool validated = false;

  // Filled by the epigraph rewrite.
  std::vector<EpigraphVariable> epigraph;
  std::vector<SignRequirement> sign_requirements;
  Expr original_objective;  // before the rewrite; null if not rewritten

  /// All declarations, parameters first.
  std::vector<Declaration> declarations() const;
  const DeclaredName* find(std::string_view name) const;
};

/// Parses a token stream. Throws kParse (with the span of the offending
/// token), kDuplicateName, or kMissingObjective.
ProblemSpec parse(const std::vector<Token>& tokens);

/// tokenize + parse.
ProblemSpec parse_model(std::string_view text);

/// Shape-checks every expression of the model. The result has annotated
/// expressions and declarations with canonical symbolic dims. Throws
/// kShapeMismatch, kUnknownName, or kNonScalarObjective.
ProblemSpec validate(const ProblemSpec& spec);

/// Renders a model in the modeling language; `parse_model` of the output
/// yields a structurally identical ProblemSpec.
std::string pretty_print(const ProblemSpec& spec);

/// Structural equality of two specs (names, kinds, expressions; not spans).
bool structurally_equal(const ProblemSpec& a, const ProblemSpec& b);

std::string_view to_string(Relation r);

}  // namespace declsolve
