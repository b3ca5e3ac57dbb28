#include <doctest.h>

#include <random>
#include <string>

#include "declsolve/corpus.hpp"
#include "declsolve/model.hpp"

using namespace declsolve;

namespace {

std::vector<TokenKind> kinds(std::string_view text) {
  std::vector<TokenKind> out;
  for (const Token& t : tokenize(text)) out.push_back(t.kind);
  return out;
}

ErrorKind error_of(std::string_view text, bool validate_too = true) {
  try {
    const ProblemSpec s = parse_model(text);
    if (validate_too) validate(s);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error for: " << text);
  return ErrorKind::kParse;
}

}  // namespace

TEST_SUITE("parser") {
  TEST_CASE("tokenize examples") {
    using K = TokenKind;
    CHECK(kinds("min norm1(x)") == std::vector<K>{K::kMin, K::kIdent, K::kLParen, K::kIdent, K::kRParen});
    CHECK(tokenize("").empty());
    const auto t = tokenize("0.5 * w' * w");
    REQUIRE(t.size() == 6);
    CHECK(t[0].kind == K::kNumber);
    CHECK(t[0].number == 0.5);
    CHECK(kinds("0.5 * w' * w") == std::vector<K>{K::kNumber, K::kStar, K::kIdent, K::kTranspose, K::kStar, K::kIdent});
    CHECK(kinds("a.*b./c.^2") ==
          std::vector<K>{K::kIdent, K::kDotStar, K::kIdent, K::kDotSlash, K::kIdent, K::kDotCaret, K::kNumber});
    CHECK(tokenize("1.5e-3")[0].number == 1.5e-3);
  }

  TEST_CASE("lexer tracks positions and rejects illegal characters") {
    const auto t = tokenize("min\n  x");
    CHECK(t[1].span.line == 2);
    CHECK(t[1].span.column == 3);
    try {
      tokenize("min x @ y");
      FAIL("expected a lex error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kLex);
      REQUIRE(e.span());
      CHECK(e.span()->offset == 6);
    }
  }

  TEST_CASE("simplex-constrained l1 model has three constraints") {
    const ProblemSpec s = validate(parse_model(corpus::find_model("simplex_cs")->text));
    CHECK(s.parameters.size() == 2);
    CHECK(s.parameters[0].decl.name == "A");
    CHECK(s.parameters[1].decl.name == "b");
    REQUIRE(s.variables.size() == 1);
    CHECK(s.variables[0].decl.name == "x");
    CHECK(s.objective.sense == Sense::kMin);
    CHECK(s.objective.expr->op == Op::kNorm1);
    REQUIRE(s.constraints.size() == 3);
    CHECK(s.constraints[0].relation == Relation::kEq);
    CHECK(s.constraints[1].relation == Relation::kEq);
    CHECK(s.constraints[2].relation == Relation::kGe);
  }

  TEST_CASE("SVM dual model") {
    const ProblemSpec s = validate(parse_model(corpus::find_model("svm")->text));
    REQUIRE(s.parameters.size() == 3);
    CHECK(s.parameters[0].decl.name == "K");
    CHECK(s.parameters[0].decl.symmetric);
    CHECK(s.parameters[1].kind == DeclKind::kScalar);
    CHECK(s.parameters[2].kind == DeclKind::kVector);
    REQUIRE(s.variables.size() == 1);
    CHECK(s.variables[0].decl.name == "a");
    CHECK(s.objective.expr->shape.is_scalar());
    CHECK(s.constraints.size() == 2);
  }

  TEST_CASE("empty parameter block is legal") {
    const ProblemSpec s = parse_model("variables Vector x min x");
    CHECK(s.parameters.empty());
    CHECK(s.variables.size() == 1);
    CHECK(validate(parse_model("variables Vector x min x' * x")).objective.expr->shape.is_scalar());
  }

  TEST_CASE("validation errors") {
    CHECK(error_of("parameters Matrix A variables Vector x min A*x") == ErrorKind::kNonScalarObjective);
    CHECK(error_of("parameters Vector a Vector a variables Vector x min sum(x)") == ErrorKind::kDuplicateName);
    CHECK(error_of("parameters Vector b variables Vector x") == ErrorKind::kMissingObjective);
    CHECK(error_of("variables Vector x min sum(y)") == ErrorKind::kUnknownName);
    CHECK(error_of("variables Vector x min sum(x + 1)") == ErrorKind::kShapeMismatch);
    CHECK(error_of("variables Vector x min sum(x) st 0 <= x <= 1", false) == ErrorKind::kParse);
    CHECK(error_of("variables Vector x min sum(x) + ", false) == ErrorKind::kParse);
  }

  TEST_CASE("log det of an outer product is accepted") {
    const ProblemSpec s = validate(parse_model("variables Vector x min log(det(x*x'))"));
    CHECK(s.objective.expr->shape.is_scalar());
  }

  TEST_CASE("comments, strict relations, and max") {
    const ProblemSpec s = validate(parse_model(
        "# leading comment\nvariables Vector x # trailing\nmax -sum(x.^2) st x > 0"));
    CHECK(s.objective.sense == Sense::kMax);
    REQUIRE(s.constraints.size() == 1);
    CHECK(s.constraints[0].relation == Relation::kGe);
    CHECK(s.constraints[0].strict_spelling);
  }

  TEST_CASE("precedence of transpose, power, products, and sums") {
    const ProblemSpec s = parse_model("variables Vector x min -x'*x + 2*x'*x.^2");
    const Expr& e = s.objective.expr;
    REQUIRE(e->op == Op::kAdd);
    // unary minus binds tighter than the product
    REQUIRE(e->children[0]->op == Op::kMul);
    CHECK(e->children[0]->children[0]->op == Op::kNeg);
    CHECK(e->children[1]->op == Op::kMul);
  }

  TEST_CASE("pretty printing round-trips every bundled model") {
    std::vector<corpus::ModelText> all = corpus::list_models();
    for (const auto& m : corpus::extra_models()) all.push_back(m);
    for (const auto& m : all) {
      CAPTURE(m.name);
      const ProblemSpec a = parse_model(m.text);
      const std::string text = pretty_print(a);
      const ProblemSpec b = parse_model(text);
      CHECK(structurally_equal(a, b));
      CHECK(pretty_print(b) == text);
      CHECK_NOTHROW(validate(b));
    }
  }

  TEST_CASE("parsing is total on mutated and random input") {
    std::mt19937_64 gen(2024);
    const auto models = corpus::list_models();
    const std::string alphabet = "abcxyz019.*/+-'^()=<>,#\n \t@$[]";
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    for (int trial = 0; trial < 3000; ++trial) {
      std::string text;
      if (trial % 3 == 0) {
        const std::size_t len = gen() % 80;
        for (std::size_t i = 0; i < len; ++i) text.push_back(static_cast<char>(gen() % 256));
      } else {
        text = std::string(models[gen() % models.size()].text);
        const int edits = 1 + static_cast<int>(gen() % 4);
        for (int k = 0; k < edits && !text.empty(); ++k) {
          const std::size_t pos = gen() % text.size();
          switch (gen() % 3) {
            case 0: text.erase(pos, 1 + gen() % 5); break;
            case 1: text.insert(pos, 1, alphabet[gen() % alphabet.size()]); break;
            default: text[pos] = alphabet[gen() % alphabet.size()]; break;
          }
        }
      }
      try {
        validate(parse_model(text));
        ++accepted;
      } catch (const Error& e) {
        ++rejected;
        if (e.span()) {
          CHECK(e.span()->offset <= text.size());
          CHECK(e.span()->offset + e.span()->length <= text.size() + 1);
        }
      }
    }
    CHECK(accepted + rejected == 3000);
    CHECK(rejected > 0);
  }

  TEST_CASE("parse errors point into the text") {
    const std::string text = "variables Vector x\nmin sum(x) st x == ";
    try {
      parse_model(text);
      FAIL("expected a parse error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kParse);
      REQUIRE(e.span());
      CHECK(e.span()->line == 2);
      CHECK(e.span()->offset <= text.size());
    }
  }
}
