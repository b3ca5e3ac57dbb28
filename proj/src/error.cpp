#include "declsolve/error.hpp"

#include <algorithm>

namespace declsolve {

Span Span::cover(const Span& a, const Span& b) {
  const Span& first = a.offset <= b.offset ? a : b;
  const std::size_t end = std::max(a.offset + a.length, b.offset + b.length);
  Span out = first;
  out.length = end - first.offset;
  return out;
}

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kLex: return "LexError";
    case ErrorKind::kParse: return "ParseError";
    case ErrorKind::kDuplicateName: return "DuplicateName";
    case ErrorKind::kMissingObjective: return "MissingObjective";
    case ErrorKind::kUnknownName: return "UnknownName";
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
    case ErrorKind::kNonScalarObjective: return "NonScalarObjective";
    case ErrorKind::kDimension: return "DimensionError";
    case ErrorKind::kNumeric: return "NumericError";
    case ErrorKind::kNonSmoothNode: return "NonSmoothNode";
    case ErrorKind::kNonScalarSource: return "NonScalarSource";
    case ErrorKind::kNonConvexNonSmooth: return "NonConvexNonSmooth";
    case ErrorKind::kShapeUnification: return "ShapeUnificationError";
    case ErrorKind::kNonSmoothResidue: return "NonSmoothResidue";
    case ErrorKind::kFormat: return "FormatError";
    case ErrorKind::kNonNumericCell: return "NonNumericCell";
    case ErrorKind::kConfig: return "ConfigError";
    case ErrorKind::kInfeasibleBounds: return "InfeasibleBounds";
    case ErrorKind::kBinding: return "BindingError";
  }
  return "Error";
}

Error::Error(ErrorKind kind, const std::string& message, std::optional<Span> span)
    : std::runtime_error(message), kind_(kind), span_(span) {}

}  // namespace declsolve
