#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace declsolve {

/// Location of a token or expression inside model text. `offset` and `length`
/// are byte positions; `line` and `column` are 1-based.
struct Span {
  std::size_t offset = 0;
  std::size_t length = 0;
  std::size_t line = 1;
  std::size_t column = 1;

  /// Smallest span covering both inputs.
  static Span cover(const Span& a, const Span& b);
};

enum class ErrorKind {
  kLex,
  kParse,
  kDuplicateName,
  kMissingObjective,
  kUnknownName,
  kShapeMismatch,
  kNonScalarObjective,
  kDimension,
  kNumeric,
  kNonSmoothNode,
  kNonScalarSource,
  kNonConvexNonSmooth,
  kShapeUnification,
  kNonSmoothResidue,
  kFormat,
  kNonNumericCell,
  kConfig,
  kInfeasibleBounds,
  kBinding,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for expected failures. Carries a kind so callers can
/// dispatch and an optional source span for model-level diagnostics.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::optional<Span> span = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  const std::optional<Span>& span() const noexcept { return span_; }

 private:
  ErrorKind kind_;
  std::optional<Span> span_;
};

}  // namespace declsolve
