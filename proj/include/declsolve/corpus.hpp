#pragma once

// Bundled models and synthetic data generators.
//
// All generators draw from xoshiro256** seeded through splitmix64; normals
// come from the Box-Muller transform. The same seed gives bitwise-identical
// instances on every platform with IEEE-754 doubles and a correctly rounded
// libm for log/sqrt/cos.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "declsolve/dense.hpp"
#include "declsolve/eval.hpp"

namespace declsolve::corpus {

struct ModelText {
  std::string_view name;
  std::string_view group;  // "models" for the reference set, "extra" otherwise
  std::string_view text;
};

/// The eight reference models, in a fixed order.
std::vector<ModelText> list_models();
/// Additional models (boxed SVM, simplex-constrained l1, packing LP).
std::vector<ModelText> extra_models();
/// Looks a model up by name in both groups.
std::optional<ModelText> find_model(std::string_view name);

class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal.
  double normal();
  /// Uniform integer in [0, n).
  std::size_t below(std::size_t n);

 private:
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct GeneratedInstance {
  std::string name;
  std::string model;  // name of the model the bindings are meant for
  Env data;
  std::map<std::string, Dense> truth;  // planted solution, if any
  std::optional<double> optimal_value;
  std::uint64_t seed = 0;
  /// Variable extents the bindings leave open, as (rows, cols).
  std::map<std::string, std::pair<std::size_t, std::size_t>> sizes;
};

/// Gaussian X (m x n), beta_j = (-1)^j exp(-j/10) for j = 1..n, and
/// y = X beta + k z with k chosen so that |X beta|^2 / (k^2 |z|^2) = 3.
/// Bindings: X, y, n = 1/(2m), a1 = alpha*lambda, a2 = (1-alpha)*lambda/2.
GeneratedInstance gen_elasticnet(std::size_t m, std::size_t n, std::uint64_t seed,
                                 double lambda = 0.01, double alpha = 0.5);

enum class NnlsVariant { kI, kII };

/// Variant i: uniform [0,1] A, 1% nonzeros, y = sqrt(0.003) A x + 0.003 z.
/// Variant ii: Gaussian A, 10% nonzeros, y = sqrt(1/6000) A x + 0.003 z.
/// Nonzero values of x are uniform in [0,1]. Bindings: A, b.
GeneratedInstance gen_nnls(NnlsVariant variant, std::size_t m, std::size_t n,
                           std::uint64_t seed);

/// X = U U' with |N(0,1)| entries in U (n x k). Bindings: X; truth: U;
/// sizes: U is n x k.
GeneratedInstance gen_symnmf(std::size_t n, std::size_t k, std::uint64_t seed);

/// Gaussian A with rows orthonormalized, Gaussian values on nnz random
/// coordinates of x*, b = A x*. Bindings: A, b; truth: x.
GeneratedInstance gen_compressed_sensing(std::size_t m, std::size_t n, std::size_t nnz,
                                         std::uint64_t seed);

/// Gaussian X, binary labels b in {0,1}. The model computes
/// s |y - 0.5 tanh(0.5 X w) + 0.5|^2, which equals s |b - sigmoid(X w)|^2
/// when y = b - 1, so that is what is bound. Bindings: X, y, s = 1/m;
/// truth: "b" holds the labels.
GeneratedInstance gen_nonlinear_ls(std::size_t m, std::size_t n, std::uint64_t seed);

/// Two Gaussian clouds in `dim` dimensions with labels +-1, RBF kernel.
/// Bindings: K, y, c.
GeneratedInstance gen_svm(std::size_t m, std::size_t dim, std::uint64_t seed,
                          double gamma = 0.5, double c = 1.0);

/// Two Gaussian clouds, labels +-1. Bindings: X, y, c = 1/(lambda m).
GeneratedInstance gen_logreg(std::size_t m, std::size_t n, std::uint64_t seed,
                             double lambda = 1e-4);

/// Nonnegative A (m x n), b, c for the packing LP.
GeneratedInstance gen_packing_lp(std::size_t m, std::size_t n, std::uint64_t seed);

/// Labeled data in LIBSVM text format: `label idx:value ...`, 1-based
/// indices, missing entries are zero.
struct LabeledData {
  Dense X;
  Dense y;  // column
};
LabeledData read_libsvm(const std::string& path, std::size_t min_features = 0);
LabeledData parse_libsvm(std::string_view text, std::size_t min_features = 0);

/// K_ij = exp(-gamma |x_i - x_j|^2).
Dense rbf_kernel(const Dense& X, double gamma);

/// SVM bindings (K, y, c) for labeled data.
Env svm_bindings(const LabeledData& d, double gamma = 0.5, double c = 1.0);
/// Logistic regression bindings (X, y, c = 1/(lambda m)).
Env logreg_bindings(const LabeledData& d, double lambda = 1e-4);

/// Desk-scale default instance for every bundled and extra model name.
GeneratedInstance default_instance(std::string_view model, std::uint64_t seed);
/// Names accepted by default_instance.
std::vector<std::string> generator_names();

namespace detail {
const std::vector<ModelText>& embedded_models();
}

}  // namespace declsolve::corpus
